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

#include "carsynth/scene.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "carsynth/dsp.h"
#include "carsynth/error.h"

namespace carsynth {
namespace {

constexpr double kFrameSeconds = 0.025;
constexpr double kActiveRangeDb = 35.0;

std::string Join(const std::vector<int>& v) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << "}";
  return os.str();
}

std::string FormatDouble(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

const Setup& SceneSetup(const DatasetIndex& index, const SceneSpec& spec) {
  return index.setup(spec.car, spec.setup);
}

AudioBuffer Zeros(const SceneSpec& spec, const Setup& setup) {
  return AudioBuffer(static_cast<int>(SelectedChannels(spec, setup).size()), SceneLength(spec),
                     spec.target_rate);
}

std::string AvailableConditions(const Setup& setup, NoiseKind kind) {
  std::ostringstream os;
  bool first = true;
  for (const NoiseClip& c : setup.noise_clips) {
    if (c.kind != kind) continue;
    os << (first ? "" : " ") << "("
       << (kind == NoiseKind::kDriving ? *c.speed_kmh : *c.ventilation_level) << ","
       << c.window_state << ")";
    first = false;
  }
  return first ? "none" : os.str();
}

AudioBuffer NoiseComponent(const NoiseClip& clip, const SceneSpec& spec, const Setup& setup,
                           char tag) {
  const auto channels = SelectedChannels(spec, setup);
  const AudioBuffer selected = clip.clip().SelectChannels(channels);
  const AudioBuffer resampled = Resample(selected, spec.target_rate);
  return Recycle(resampled, SceneLength(spec), ComponentSeed(spec.seed, tag));
}

std::optional<double> LevelAt(const AudioBuffer& buf, int index, double offset) {
  if (buf.IsSilent()) return std::nullopt;
  try {
    return AWeightedLevelDbfs(buf, index) + offset;
  } catch (const InvalidArgument&) {
    return std::nullopt;  // silent on this channel
  }
}

}  // namespace

void ValidateSpec(const SceneSpec& spec) {
  if (spec.window_state < 0 || spec.window_state > 3) {
    throw InvalidArgument("w must be an integer in [0,3] (got " + std::to_string(spec.window_state) + ")");
  }
  if (spec.ventilation_level && (*spec.ventilation_level < 1 || *spec.ventilation_level > 3)) {
    throw InvalidArgument("l must be an integer in [1,3] (got " +
                          std::to_string(*spec.ventilation_level) + ")");
  }
  if (!std::isfinite(spec.speech_effort_dba) || spec.speech_effort_dba < 0.0) {
    throw InvalidArgument("Ls must be >= 0 dBA (got " + FormatDouble(spec.speech_effort_dba) + ")");
  }
  if (spec.audio_level_dba && (!std::isfinite(*spec.audio_level_dba) || *spec.audio_level_dba < 0.0)) {
    throw InvalidArgument("La must be >= 0 dBA (got " + FormatDouble(*spec.audio_level_dba) + ")");
  }
  if (spec.audio_level_dba.has_value() != spec.audio_program.has_value()) {
    throw InvalidArgument(spec.audio_level_dba ? "La is set but no audio program z was given"
                                               : "audio program z was given without La");
  }
  if (spec.audio_program && spec.audio_program->empty()) {
    throw InvalidArgument("audio program z is empty");
  }
  if (spec.speed_kmh && *spec.speed_kmh < 0) {
    throw InvalidArgument("s must be >= 0 km/h (got " + std::to_string(*spec.speed_kmh) + ")");
  }
  if (spec.target_rate < AWeightingFilter::kMinSampleRate) {
    throw InvalidArgument("target_rate must be >= " + std::to_string(AWeightingFilter::kMinSampleRate) +
                          " Hz (got " + std::to_string(spec.target_rate) + ")");
  }
  if (spec.speech.channel_count() < 1 || spec.speech.empty()) {
    throw InvalidArgument("x (dry speech) is empty");
  }
  if (spec.speech.IsSilent()) throw InvalidArgument("x (dry speech) is silent");
  std::set<int> seen;
  for (int c : spec.channels) {
    if (!seen.insert(c).second) {
      throw InvalidArgument("channels lists " + std::to_string(c) + " twice");
    }
  }
}

void ValidateSpec(const SceneSpec& spec, const DatasetIndex& index) {
  ValidateSpec(spec);
  const Car& car = index.car(spec.car);
  const Setup& setup = index.setup(spec.car, spec.setup);
  for (int c : spec.channels) {
    if (c < 0 || c >= setup.channel_count) {
      throw InvalidArgument("channel " + std::to_string(c) + " outside 0.." +
                            std::to_string(setup.channel_count - 1));
    }
  }
  if (spec.speed_kmh && std::find(setup.speed_grid_kmh.begin(), setup.speed_grid_kmh.end(),
                                  *spec.speed_kmh) == setup.speed_grid_kmh.end()) {
    throw InvalidArgument("s=" + std::to_string(*spec.speed_kmh) +
                          " km/h is not in the speed grid " + Join(setup.speed_grid_kmh));
  }
  if (spec.ventilation_level &&
      std::find(setup.ventilation_levels.begin(), setup.ventilation_levels.end(),
                *spec.ventilation_level) == setup.ventilation_levels.end()) {
    throw InvalidArgument("l=" + std::to_string(*spec.ventilation_level) +
                          " is not among the ventilation levels " + Join(setup.ventilation_levels));
  }
  if (spec.audio_level_dba && !car.has_audio_system) {
    throw DatasetError("no audio system in car \"" + car.id + "\" (La cannot be used)");
  }
}

std::vector<int> SelectedChannels(const SceneSpec& spec, const Setup& setup) {
  if (!spec.channels.empty()) return spec.channels;
  std::vector<int> all(static_cast<std::size_t>(setup.channel_count));
  for (int c = 0; c < setup.channel_count; ++c) all[static_cast<std::size_t>(c)] = c;
  return all;
}

std::size_t SceneLength(const SceneSpec& spec) {
  return ResampledLength(spec.speech.frames(), spec.speech.sample_rate(), spec.target_rate);
}

AudioBuffer ResampleImpulseResponse(const AudioBuffer& ir, int target_rate) {
  if (ir.sample_rate() == target_rate) return ir;
  AudioBuffer out = Resample(ir, target_rate);
  out.Scale(static_cast<double>(ir.sample_rate()) / target_rate);
  return out;
}

double ActiveSpeechLevelDbfs(const AudioBuffer& mono) {
  if (mono.channel_count() != 1) throw InvalidArgument("active level needs a mono signal");
  const AWeightingFilter filter(mono.sample_rate());
  const std::vector<double> y = filter.Apply(mono.channel(0));
  const std::size_t frame =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(kFrameSeconds * mono.sample_rate())));
  const std::size_t hop = frame / 2;

  std::vector<double> energies;
  if (y.size() < frame) {
    const double rms = Rms(y);
    energies.push_back(rms * rms);
  } else {
    for (std::size_t start = 0; start + frame <= y.size(); start += hop) {
      long double acc = 0.0L;
      for (std::size_t i = start; i < start + frame; ++i) acc += static_cast<long double>(y[i]) * y[i];
      energies.push_back(static_cast<double>(acc / frame));
    }
  }
  const double peak = *std::max_element(energies.begin(), energies.end());
  if (!(peak > 0.0)) throw InvalidArgument("x (dry speech) is silent");
  const double floor = peak * std::pow(10.0, -kActiveRangeDb / 10.0);
  long double sum = 0.0L;
  std::size_t count = 0;
  for (double e : energies) {
    if (e >= floor) {
      sum += e;
      ++count;
    }
  }
  return 10.0 * std::log10(static_cast<double>(sum / count));
}

AudioBuffer BuildSpeech(const DatasetIndex& index, const SceneSpec& spec, SpeechGains* gains) {
  ValidateSpec(spec, index);
  const Setup& setup = SceneSetup(index, spec);
  const ImpulseResponseSet* ir = setup.FindImpulseResponse(spec.position, spec.window_state);
  if (!ir) {
    throw DatasetError("no impulse response for p=" + std::string(ToString(spec.position)) +
                       ", w=" + std::to_string(spec.window_state) + " in " + spec.car + "/" +
                       std::string(ToString(spec.setup)));
  }
  const AudioBuffer mono = spec.speech.channel_count() > 1 ? Downmix(spec.speech) : spec.speech;
  AudioBuffer x = Resample(mono, spec.target_rate);

  SpeechGains g;
  g.active_level_dbfs = ActiveSpeechLevelDbfs(x);
  g.normalization = std::pow(10.0, -g.active_level_dbfs / 20.0);
  g.effort = std::pow(10.0, (spec.speech_effort_dba - ir->calibration_level_dba) / 20.0);
  if (gains) *gains = g;
  if (!spec.speech_enabled) return Zeros(spec, setup);

  x.Scale(g.normalization);
  x.Scale(g.effort);
  const AudioBuffer h =
      ResampleImpulseResponse(ir->ir(), spec.target_rate).SelectChannels(SelectedChannels(spec, setup));
  return Convolve(x, h);
}

AudioBuffer BuildAudioProgram(const DatasetIndex& index, const SceneSpec& spec, double* gain) {
  ValidateSpec(spec, index);
  const Setup& setup = SceneSetup(index, spec);
  if (gain) *gain = 0.0;
  if (!spec.audio_level_dba) return Zeros(spec, setup);
  const ImpulseResponseSet* ir = setup.FindImpulseResponse(SourcePosition::kAudioSystem, spec.window_state);
  if (!ir) {
    throw DatasetError("no audio-system impulse response for w=" + std::to_string(spec.window_state) +
                       " in " + spec.car + "/" + std::string(ToString(spec.setup)));
  }
  const std::size_t frames = SceneLength(spec);
  const AudioBuffer z = Resample(Downmix(*spec.audio_program), spec.target_rate);
  const AudioBuffer looped = Recycle(z, frames, ComponentSeed(spec.seed, 'A'));
  AudioBuffer full = Convolve(looped, ResampleImpulseResponse(ir->ir(), spec.target_rate));

  const int ref = setup.reference_channel;
  double g = 0.0;
  if (!full.IsSilent()) {
    double measured;
    try {
      measured = EquivalentLevel(full, setup.sensitivity, ref);
    } catch (const InvalidArgument&) {
      measured = -HUGE_VAL;  // reference channel silent
    }
    if (std::isfinite(measured)) g = std::pow(10.0, (*spec.audio_level_dba - measured) / 20.0);
  }
  full.Scale(g);
  if (gain) *gain = g;
  return full.SelectChannels(SelectedChannels(spec, setup));
}

AudioBuffer BuildNoise(const DatasetIndex& index, const SceneSpec& spec) {
  ValidateSpec(spec, index);
  const Setup& setup = SceneSetup(index, spec);
  if (!spec.speed_kmh) return Zeros(spec, setup);
  const NoiseClip* clip = setup.FindDriving(*spec.speed_kmh, spec.window_state);
  if (!clip) {
    throw DatasetError("no driving noise for s=" + std::to_string(*spec.speed_kmh) +
                       ", w=" + std::to_string(spec.window_state) + "; available (s,w): " +
                       AvailableConditions(setup, NoiseKind::kDriving));
  }
  return NoiseComponent(*clip, spec, setup, 'N');
}

AudioBuffer BuildVentilation(const DatasetIndex& index, const SceneSpec& spec) {
  ValidateSpec(spec, index);
  const Setup& setup = SceneSetup(index, spec);
  if (!spec.ventilation_level) return Zeros(spec, setup);
  const NoiseClip* clip = setup.FindVentilation(*spec.ventilation_level, spec.window_state);
  if (!clip) {
    throw DatasetError("no ventilation noise for l=" + std::to_string(*spec.ventilation_level) +
                       ", w=" + std::to_string(spec.window_state) + "; available (l,w): " +
                       AvailableConditions(setup, NoiseKind::kVentilation));
  }
  return NoiseComponent(*clip, spec, setup, 'V');
}

SceneResult Synthesize(const DatasetIndex& index, const SceneSpec& spec) {
  ValidateSpec(spec, index);
  const Setup& setup = SceneSetup(index, spec);
  SceneResult r;
  r.channels = SelectedChannels(spec, setup);
  r.speech = BuildSpeech(index, spec, &r.speech_gains);
  r.audio = BuildAudioProgram(index, spec, &r.audio_gain);
  r.noise = BuildNoise(index, spec);
  r.ventilation = BuildVentilation(index, spec);

  r.mixture = r.speech;
  r.mixture.Add(r.audio);
  r.mixture.Add(r.noise);
  r.mixture.Add(r.ventilation);

  const auto it = std::find(r.channels.begin(), r.channels.end(), setup.reference_channel);
  if (it != r.channels.end()) {
    const int i = static_cast<int>(it - r.channels.begin());
    const double offset = setup.sensitivity.offset(setup.reference_channel);
    r.reference_channel = setup.reference_channel;
    r.levels_dba.speech = LevelAt(r.speech, i, offset);
    r.levels_dba.audio = LevelAt(r.audio, i, offset);
    r.levels_dba.noise = LevelAt(r.noise, i, offset);
    r.levels_dba.ventilation = LevelAt(r.ventilation, i, offset);
    r.levels_dba.mixture = LevelAt(r.mixture, i, offset);
  }

  r.peak = r.mixture.Peak();
  if (r.peak > 1.0) {
    std::ostringstream os;
    os << "mixture peaks at " << 20.0 * std::log10(r.peak) << " dBFS (peak " << r.peak
       << "), above full scale";
    r.warnings.push_back(os.str());
  }
  if (spec.audio_level_dba && r.audio_gain == 0.0) {
    r.warnings.push_back("audio program is silent after downmix; A is all zeros");
  }
  return r;
}

std::vector<ImpulseResponse> ScenarioImpulseResponses(const DatasetIndex& index,
                                                      const SceneSpec& spec) {
  ValidateSpec(spec, index);
  const Setup& setup = SceneSetup(index, spec);
  const auto channels = SelectedChannels(spec, setup);
  std::vector<ImpulseResponse> out;
  auto add = [&](SourcePosition p) {
    const ImpulseResponseSet* ir = setup.FindImpulseResponse(p, spec.window_state);
    if (!ir) {
      throw DatasetError("no impulse response for p=" + std::string(ToString(p)) +
                         ", w=" + std::to_string(spec.window_state));
    }
    out.push_back({p, spec.window_state, ir->calibration_level_dba, ir->ir().SelectChannels(channels)});
  };
  add(spec.position);
  if (spec.audio_level_dba) add(SourcePosition::kAudioSystem);
  return out;
}

}  // namespace carsynth
