// Copyright 2026 The carsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <string>

#include "carsynth/dataset.h"
#include "carsynth/random.h"
#include "carsynth/wav.h"
#include "json.hpp"

namespace carsynth {
namespace {

using json = nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedOfSound = 343.0;
constexpr double kCalibrationDba = 60.0;
constexpr double kReverbT60 = 0.05;
constexpr double kIrSeconds = 0.12;
constexpr int kBulkDelay = 16;
constexpr double kArrayRadius = 0.05;

// Cabin coordinates in meters: origin at the dashboard array centre, x toward
// the windshield, y to the driver's (left) side, z up.
struct Point {
  double x, y, z;
};

double Distance(const Point& a, const Point& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

Point SeatPosition(SourcePosition p) {
  switch (p) {
    case SourcePosition::kDriver: return {-0.55, 0.37, 0.25};
    case SourcePosition::kFrontPassenger: return {-0.55, -0.37, 0.25};
    case SourcePosition::kRearLeft: return {-1.45, 0.40, 0.20};
    case SourcePosition::kRearMiddle: return {-1.45, 0.00, 0.20};
    case SourcePosition::kRearRight: return {-1.45, -0.40, 0.20};
    case SourcePosition::kAudioSystem: break;
  }
  return {0, 0, 0};
}

const std::vector<Point>& DoorSpeakers() {
  static const std::vector<Point> kSpeakers = {
      {-0.40, 0.75, -0.45}, {-0.40, -0.75, -0.45}, {-1.40, 0.75, -0.40}, {-1.40, -0.75, -0.40}};
  return kSpeakers;
}

std::vector<Point> MicPositions(SetupKind kind) {
  std::vector<Point> mics;
  if (kind == SetupKind::kArray) {
    for (int m = 0; m < kPhysicalChannels; ++m) {
      const double phi = 2.0 * kPi * m / kPhysicalChannels;
      mics.push_back({kArrayRadius * std::cos(phi), kArrayRadius * std::sin(phi), 0.0});
    }
  } else {
    mics = {{0.35, 0.45, 0.35}, {0.35, 0.15, 0.40}, {0.35, -0.15, 0.40}, {0.35, -0.45, 0.35},
            {0.00, 0.25, 0.05}, {0.00, -0.25, 0.05}, {-1.10, 0.35, 0.45}, {-1.10, -0.35, 0.45}};
  }
  return mics;
}

std::vector<double> SensitivityOffsets(SetupKind kind) {
  std::vector<double> offsets;
  for (int m = 0; m < kPhysicalChannels; ++m) {
    offsets.push_back(kind == SetupKind::kArray ? 108.0 + 0.5 * m : 106.0 + 0.75 * m);
  }
  return offsets;
}

int ReferenceChannel(SetupKind kind) { return kind == SetupKind::kArray ? 4 : 2; }

// Adds a Hann-windowed sinc pulse centred at fractional sample `at`.
void AddFractionalDelta(std::vector<double>& h, double at, double amplitude) {
  constexpr int kHalf = 16;
  const long centre = std::lround(std::floor(at));
  for (long n = centre - kHalf + 1; n <= centre + kHalf; ++n) {
    if (n < 0 || n >= static_cast<long>(h.size())) continue;
    const double t = n - at;
    const double sinc = t == 0.0 ? 1.0 : std::sin(kPi * t) / (kPi * t);
    const double window = 0.5 + 0.5 * std::cos(kPi * t / kHalf);
    h[static_cast<std::size_t>(n)] += amplitude * sinc * window;
  }
}

// Direct path plus an exponentially decaying diffuse tail carrying about the
// same energy as the direct path, less with the windows open.
void AddPath(std::vector<double>& h, Rng& rng, double distance, double amplitude, int window_state,
             int rate) {
  const double delay = kBulkDelay + distance / kSpeedOfSound * rate;
  AddFractionalDelta(h, delay, amplitude);
  const double tail_gain = std::sqrt(2.0 * 6.907755 / (rate * kReverbT60)) * (1.0 - 0.15 * window_state);
  const std::size_t start = static_cast<std::size_t>(delay + 0.001 * rate);
  for (std::size_t n = start; n < h.size(); ++n) {
    const double t = static_cast<double>(n - start) / rate;
    h[n] += amplitude * tail_gain * std::exp(-6.907755 * t / kReverbT60) * rng.Gaussian();
  }
}

AudioBuffer SpeechImpulseResponse(SetupKind kind, SourcePosition p, int w, const FixtureOptions& opt,
                                  std::uint64_t seed) {
  const auto mics = MicPositions(kind);
  const auto offsets = SensitivityOffsets(kind);
  if (opt.identity_irs) {
    // delayed so a resampled copy keeps both sides of its interpolation kernel
    AudioBuffer ir(kPhysicalChannels, 288, opt.ir_rate);
    for (int m = 0; m < kPhysicalChannels; ++m) {
      ir.channel(m)[144] = std::pow(10.0, (kCalibrationDba - offsets[m]) / 20.0);
    }
    return ir;
  }
  Rng rng(seed);
  const std::size_t len = static_cast<std::size_t>(std::lround(kIrSeconds * opt.ir_rate));
  std::vector<std::vector<double>> channels(kPhysicalChannels, std::vector<double>(len, 0.0));
  for (int m = 0; m < kPhysicalChannels; ++m) {
    // A 0 dBFS source maps to the calibration level at 1 m.
    const double at_1m = std::pow(10.0, (kCalibrationDba - offsets[m]) / 20.0);
    if (p == SourcePosition::kAudioSystem) {
      for (const Point& s : DoorSpeakers()) {
        const double d = Distance(s, mics[m]);
        AddPath(channels[m], rng, d, 0.5 * at_1m / d, w, opt.ir_rate);
      }
    } else {
      const double d = Distance(SeatPosition(p), mics[m]);
      AddPath(channels[m], rng, d, at_1m / d, w, opt.ir_rate);
    }
  }
  return AudioBuffer::FromChannels(channels, opt.ir_rate);
}

class OnePole {
 public:
  OnePole(double cutoff_hz, int rate) : a_(std::exp(-2.0 * kPi * cutoff_hz / rate)) {}
  double Low(double x) { return state_ = (1.0 - a_) * x + a_ * state_; }
  double High(double x) { return x - Low(x); }

 private:
  double a_;
  double state_ = 0.0;
};

struct NoiseShape {
  enum Kind { kDriving, kVentilation } kind;
  int speed_kmh = 0;
  int level = 0;
  int window_state = 0;
};

// Partially correlated multichannel noise, each channel then scaled to
// `target_dba` through its own sensitivity offset.
AudioBuffer ShapedNoise(const NoiseShape& shape, double target_dba, const std::vector<double>& offsets,
                        const FixtureOptions& opt, std::uint64_t seed) {
  const int rate = opt.noise_rate;
  const std::size_t len = static_cast<std::size_t>(std::lround(opt.noise_seconds * rate));
  const std::size_t warmup = static_cast<std::size_t>(rate / 2);
  Rng rng(seed);

  std::vector<PinkFilter> pink(kPhysicalChannels);
  std::vector<OnePole> low, high, low2;
  for (int m = 0; m < kPhysicalChannels; ++m) {
    if (shape.kind == NoiseShape::kDriving) {
      low.emplace_back(300.0 + 8.0 * shape.speed_kmh + 400.0 * shape.window_state, rate);
      high.emplace_back(20.0, rate);
      low2.emplace_back(0.45 * rate, rate);
    } else {
      low.emplace_back(1200.0 + 600.0 * shape.level, rate);
      high.emplace_back(150.0, rate);
      low2.emplace_back(1200.0 + 600.0 * shape.level, rate);
    }
  }

  std::vector<std::vector<double>> channels(kPhysicalChannels, std::vector<double>(len));
  for (std::size_t n = 0; n < warmup + len; ++n) {
    const double common = rng.Gaussian();
    for (int m = 0; m < kPhysicalChannels; ++m) {
      const double white = 0.5 * common + 0.8660254 * rng.Gaussian();
      double v;
      if (shape.kind == NoiseShape::kDriving) {
        v = high[m].High(low[m].Low(pink[m](white)));
      } else {
        v = low2[m].Low(low[m].Low(high[m].High(white)));
      }
      if (n >= warmup) channels[m][n - warmup] = v;
    }
  }
  AudioBuffer out = AudioBuffer::FromChannels(channels, rate);
  for (int m = 0; m < kPhysicalChannels; ++m) {
    const double gain = std::pow(10.0, (target_dba - offsets[m] - AWeightedLevelDbfs(out, m)) / 20.0);
    for (double& v : out.channel(m)) v *= gain;
  }
  return out;
}

AudioBuffer EventClip(const FixtureOptions& opt, std::uint64_t seed) {
  const int rate = opt.noise_rate;
  const std::size_t len = static_cast<std::size_t>(2 * rate);
  Rng rng(seed);
  AudioBuffer out(kPhysicalChannels, len, rate);
  const std::size_t onset = static_cast<std::size_t>(0.3 * rate);
  for (std::size_t n = onset; n < len; ++n) {
    const double env = 0.05 * std::exp(-static_cast<double>(n - onset) / (0.08 * rate));
    const double common = rng.Gaussian();
    for (int m = 0; m < kPhysicalChannels; ++m) {
      out.channel(m)[n] = env * (0.7 * common + 0.3 * rng.Gaussian());
    }
  }
  return out;
}

std::string WindowTag(int w) { return "_w" + std::to_string(w); }

}  // namespace

double FixtureDrivingLevel(int speed_kmh, int window_state) {
  return 44.0 + 0.28 * speed_kmh + 2.5 * window_state;
}

double FixtureVentilationLevel(int level, int window_state) {
  return 46.0 + 8.0 * level + 1.5 * window_state;
}

void GenerateFixture(const std::filesystem::path& root, const FixtureOptions& opt) {
  if (opt.noise_seconds <= 0 || opt.noise_rate < AWeightingFilter::kMinSampleRate ||
      opt.ir_rate < AWeightingFilter::kMinSampleRate) {
    throw InvalidArgument("fixture options out of range");
  }
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec || !std::filesystem::is_directory(root)) {
    throw IoError("cannot create fixture directory " + root.string() + ": " + ec.message());
  }

  const std::string car_id = "fixture";
  json car = {{"id", car_id},
              {"brand", "Synthetic"},
              {"model", "Fixture cabin"},
              {"year", 2026},
              {"audio_system", true},
              {"setups", json::array()}};

  for (SetupKind kind : {SetupKind::kArray, SetupKind::kDistributed}) {
    const std::string setup_name(ToString(kind));
    const std::filesystem::path rel_dir = std::filesystem::path(car_id) / setup_name;
    std::filesystem::create_directories(root / rel_dir / "ir", ec);
    std::filesystem::create_directories(root / rel_dir / "noise", ec);
    if (ec) throw IoError("cannot create " + (root / rel_dir).string() + ": " + ec.message());

    const auto offsets = SensitivityOffsets(kind);
    json positions = json::array();
    for (const Point& p : MicPositions(kind)) positions.push_back({p.x, p.y, p.z});
    json source_names = json::array();
    for (SourcePosition p : PassengerPositions()) source_names.push_back(ToString(p));

    json setup = {{"name", setup_name},
                  {"channels", kPhysicalChannels},
                  {"reference_channel", ReferenceChannel(kind)},
                  {"sensitivity_db", offsets},
                  {"geometry", {{"speed_of_sound", kSpeedOfSound}, {"positions", positions}}},
                  {"window_states", {0, 1, 2, 3}},
                  {"speed_grid_kmh", opt.speed_grid_kmh},
                  {"ventilation_levels", opt.ventilation_levels},
                  {"source_positions", source_names},
                  {"impulse_responses", json::array()},
                  {"noise", json::array()}};

    std::vector<SourcePosition> ir_positions = PassengerPositions();
    ir_positions.push_back(SourcePosition::kAudioSystem);
    for (SourcePosition p : ir_positions) {
      for (int w = 0; w < 4; ++w) {
        const std::string rel = (rel_dir / "ir" / (std::string(ToString(p)) + WindowTag(w) + ".wav")).generic_string();
        const auto ir = SpeechImpulseResponse(kind, p, w, opt, DeriveSeed(opt.seed, rel));
        WriteWav(root / rel, ir, SampleFormat::kPcm24);
        setup["impulse_responses"].push_back(
            {{"position", ToString(p)}, {"window", w}, {"calibration_dba", kCalibrationDba}, {"file", rel}});
      }
    }
    for (int w = 0; w < 4; ++w) {
      for (int s : opt.speed_grid_kmh) {
        const std::string rel =
            (rel_dir / "noise" / ("driving_s" + std::to_string(s) + WindowTag(w) + ".wav")).generic_string();
        NoiseShape shape{NoiseShape::kDriving, s, 0, w};
        WriteWav(root / rel,
                 ShapedNoise(shape, FixtureDrivingLevel(s, w), offsets, opt, DeriveSeed(opt.seed, rel)));
        setup["noise"].push_back({{"kind", "driving"}, {"speed_kmh", s}, {"window", w}, {"file", rel}});
      }
      for (int l : opt.ventilation_levels) {
        const std::string rel =
            (rel_dir / "noise" / ("ventilation_l" + std::to_string(l) + WindowTag(w) + ".wav")).generic_string();
        NoiseShape shape{NoiseShape::kVentilation, 0, l, w};
        WriteWav(root / rel,
                 ShapedNoise(shape, FixtureVentilationLevel(l, w), offsets, opt, DeriveSeed(opt.seed, rel)));
        setup["noise"].push_back({{"kind", "ventilation"}, {"level", l}, {"window", w}, {"file", rel}});
      }
    }
    const std::string event_rel = (rel_dir / "noise" / "event_door_w0.wav").generic_string();
    WriteWav(root / event_rel, EventClip(opt, DeriveSeed(opt.seed, event_rel)));
    setup["noise"].push_back(
        {{"kind", "event"}, {"window", 0}, {"annotation", "door slam"}, {"file", event_rel}});
    car["setups"].push_back(std::move(setup));
  }

  json manifest = {{"format", "carsynth-dataset"}, {"version", 1}, {"cars", json::array({car})}};
  const std::string text = manifest.dump(2) + "\n";
  WriteFileBytes(root / kManifestName,
                 std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace carsynth
