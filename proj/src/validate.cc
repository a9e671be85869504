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
#include <optional>
#include <sstream>

#include "carsynth/dataset.h"

namespace carsynth {
namespace {

struct FormatExpectation {
  std::optional<int> ir_rate;
  std::optional<int> noise_rate;
};

class SetupChecker {
 public:
  SetupChecker(const Car& car, const Setup& setup, const ValidationOptions& options,
               std::vector<Finding>& out)
      : car_(car), setup_(setup), options_(options), out_(out) {}

  void Run(const std::vector<DanglingReference>& dangling) {
    CheckCoverage(dangling);
    for (const auto& ir : setup_.impulse_responses) CheckImpulseResponse(ir);
    for (const auto& clip : setup_.noise_clips) CheckNoise(clip);
  }

 private:
  void Add(Finding::Kind kind, const std::string& file, const std::string& message) {
    out_.push_back({kind, car_.id, std::string(ToString(setup_.kind)), file, message});
  }

  static std::string DanglingFileFor(const std::vector<DanglingReference>& dangling,
                                     const Car& car, SetupKind kind, const std::string& key) {
    for (const auto& d : dangling) {
      if (d.car == car.id && d.setup == kind && d.key == key) return d.file;
    }
    return "";
  }

  void CheckCoverage(const std::vector<DanglingReference>& dangling) {
    std::vector<SourcePosition> positions = setup_.source_positions;
    if (car_.has_audio_system) positions.push_back(SourcePosition::kAudioSystem);
    for (SourcePosition p : positions) {
      for (int w : setup_.window_states) {
        if (setup_.FindImpulseResponse(p, w)) continue;
        const std::string key = "ir p=" + std::string(ToString(p)) + " w=" + std::to_string(w);
        const std::string file = DanglingFileFor(dangling, car_, setup_.kind, key);
        Add(Finding::Kind::kMissingImpulseResponse, file,
            "no impulse response for p=" + std::string(ToString(p)) + ", w=" + std::to_string(w) +
                (file.empty() ? "" : " (file missing)"));
      }
    }
    for (int s : setup_.speed_grid_kmh) {
      for (int w : setup_.window_states) {
        if (setup_.FindDriving(s, w)) continue;
        const std::string key = "driving w=" + std::to_string(w) + " s=" + std::to_string(s);
        const std::string file = DanglingFileFor(dangling, car_, setup_.kind, key);
        Add(Finding::Kind::kMissingNoise, file,
            "no driving noise for s=" + std::to_string(s) + ", w=" + std::to_string(w) +
                (file.empty() ? "" : " (file missing)"));
      }
    }
    for (int l : setup_.ventilation_levels) {
      for (int w : setup_.window_states) {
        if (setup_.FindVentilation(l, w)) continue;
        const std::string key = "ventilation w=" + std::to_string(w) + " l=" + std::to_string(l);
        const std::string file = DanglingFileFor(dangling, car_, setup_.kind, key);
        Add(Finding::Kind::kMissingNoise, file,
            "no ventilation noise for l=" + std::to_string(l) + ", w=" + std::to_string(w) +
                (file.empty() ? "" : " (file missing)"));
      }
    }
  }

  const AudioBuffer* Load(const std::shared_ptr<const LazyAudio>& audio, const std::string& file) {
    try {
      return &audio->Get();
    } catch (const Error& e) {
      Add(Finding::Kind::kUnreadable, file, e.what());
      return nullptr;
    }
  }

  void CheckFormat(const AudioBuffer& buf, const std::string& file, std::optional<int>& rate,
                   const char* what) {
    if (buf.channel_count() != setup_.channel_count) {
      Add(Finding::Kind::kFormatMismatch, file,
          std::to_string(buf.channel_count()) + " channels, setup declares " +
              std::to_string(setup_.channel_count));
    }
    if (!rate) {
      rate = buf.sample_rate();
    } else if (*rate != buf.sample_rate()) {
      Add(Finding::Kind::kFormatMismatch, file,
          std::string(what) + " sample rate " + std::to_string(buf.sample_rate()) +
              " Hz differs from " + std::to_string(*rate) + " Hz used by the other " + what +
              " files");
    }
    CheckClipping(buf, file);
  }

  void CheckClipping(const AudioBuffer& buf, const std::string& file) {
    std::size_t runs = 0;
    std::ostringstream channels;
    for (int c = 0; c < buf.channel_count(); ++c) {
      std::size_t channel_runs = 0;
      int run = 0;
      for (double v : buf.channel(c)) {
        if (std::abs(v) >= options_.clip_level) {
          if (++run == options_.clip_run) ++channel_runs;
        } else {
          run = 0;
        }
      }
      if (channel_runs) {
        channels << (runs ? "," : "") << c;
        runs += channel_runs;
      }
    }
    if (runs) {
      Add(Finding::Kind::kClipping, file,
          std::to_string(runs) + " clipped run(s) of >= " + std::to_string(options_.clip_run) +
              " samples on channel(s) " + channels.str());
    }
  }

  void CheckImpulseResponse(const ImpulseResponseSet& ir) {
    const AudioBuffer* buf = Load(ir.audio, ir.file);
    if (!buf) return;
    CheckFormat(*buf, ir.file, formats_.ir_rate, "impulse response");
    for (int c = 0; c < buf->channel_count(); ++c) {
      bool silent = true;
      for (double v : buf->channel(c)) {
        if (v != 0.0) {
          silent = false;
          break;
        }
      }
      if (silent) Add(Finding::Kind::kSilentChannel, ir.file, "channel " + std::to_string(c) + " is all zeros");
    }
  }

  void CheckNoise(const NoiseClip& clip) {
    const AudioBuffer* buf = Load(clip.audio, clip.file);
    if (!buf) return;
    CheckFormat(*buf, clip.file, formats_.noise_rate, "noise");
    if (clip.kind != NoiseKind::kEvent && buf->duration_seconds() < kMinStationarySeconds) {
      std::ostringstream os;
      os << ToString(clip.kind) << " clip lasts " << buf->duration_seconds() << " s, at least "
         << kMinStationarySeconds << " s required";
      Add(Finding::Kind::kShortClip, clip.file, os.str());
    }
  }

  const Car& car_;
  const Setup& setup_;
  const ValidationOptions& options_;
  std::vector<Finding>& out_;
  FormatExpectation formats_;
};

}  // namespace

std::string_view ToString(Finding::Kind k) {
  switch (k) {
    case Finding::Kind::kMissingImpulseResponse: return "missing_impulse_response";
    case Finding::Kind::kMissingNoise: return "missing_noise";
    case Finding::Kind::kFormatMismatch: return "format_mismatch";
    case Finding::Kind::kClipping: return "clipping";
    case Finding::Kind::kSilentChannel: return "silent_channel";
    case Finding::Kind::kShortClip: return "short_clip";
    case Finding::Kind::kUnreadable: return "unreadable";
  }
  return "?";
}

std::size_t ValidationReport::count(Finding::Kind kind) const {
  std::size_t n = 0;
  for (const auto& f : findings) n += f.kind == kind;
  return n;
}

ValidationReport Validate(const DatasetIndex& index, const ValidationOptions& options) {
  ValidationReport report;
  for (const Car& car : index.cars()) {
    for (const Setup& setup : car.setups) {
      SetupChecker(car, setup, options, report.findings).Run(index.dangling());
    }
  }
  return report;
}

}  // namespace carsynth
