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

#ifndef CARSYNTH_SCENE_H_
#define CARSYNTH_SCENE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "carsynth/audio_buffer.h"
#include "carsynth/dataset.h"

namespace carsynth {

inline constexpr std::uint64_t kDefaultSeed = 20240101;
inline constexpr int kDefaultTargetRate = 16000;
inline constexpr double kCrossfadeSeconds = 0.1;

// Parameters of one synthesized cabin scene:
//   Y = S(p, Ls, w, x) + A(La, w, z) + N(s, w) + V(l, w)
struct SceneSpec {
  std::string car;
  SetupKind setup = SetupKind::kArray;
  SourcePosition position = SourcePosition::kDriver;  // p
  double speech_effort_dba = 60.0;                     // Ls
  int window_state = 0;                                // w
  AudioBuffer speech;                                  // x, any rate
  // When false S is all zeros; x still fixes the scene length.
  bool speech_enabled = true;
  std::optional<double> audio_level_dba;  // La
  std::optional<AudioBuffer> audio_program;  // z, any rate / channel count
  std::optional<int> speed_kmh;          // s
  std::optional<int> ventilation_level;  // l
  std::vector<int> channels;             // empty selects every channel
  int target_rate = kDefaultTargetRate;
  std::uint64_t seed = kDefaultSeed;
};

// Throws InvalidArgument naming the offending parameter.
void ValidateSpec(const SceneSpec& spec);
// ValidateSpec plus the checks that need the dataset (grid membership,
// channel indices, setup existence).
void ValidateSpec(const SceneSpec& spec, const DatasetIndex& index);

// Channel indices the spec selects, resolved against the setup.
std::vector<int> SelectedChannels(const SceneSpec& spec, const Setup& setup);

struct SpeechGains {
  double normalization = 0.0;  // brings x to the 0 dBFS active-level reference
  double effort = 0.0;         // 10^((Ls - calibration) / 20)
  double active_level_dbfs = 0.0;
};

AudioBuffer BuildSpeech(const DatasetIndex& index, const SceneSpec& spec,
                        SpeechGains* gains = nullptr);
// Scene length in frames: the dry speech length at the target rate.
std::size_t SceneLength(const SceneSpec& spec);

// The A, N and V builders return all-zero buffers when their parameter is
// absent, and otherwise SceneLength(spec) frames.
AudioBuffer BuildAudioProgram(const DatasetIndex& index, const SceneSpec& spec,
                              double* gain = nullptr);
AudioBuffer BuildNoise(const DatasetIndex& index, const SceneSpec& spec);
AudioBuffer BuildVentilation(const DatasetIndex& index, const SceneSpec& spec);

// A-weighted active level of a mono signal in dBFS: mean energy over 25 ms
// frames (50 % overlap) lying within 35 dB of the loudest frame.
double ActiveSpeechLevelDbfs(const AudioBuffer& mono);

// Loops or excerpts a clip to exactly `target_len` frames.
//
// A clip at least as long as the target yields a contiguous excerpt starting
// at `offset`. A shorter clip is looped with a linear 100 ms crossfade at
// each seam (period = clip length - crossfade) and the stream is read from
// `offset`. Clips shorter than two crossfades are concatenated without
// fading.
AudioBuffer RecycleFrom(const AudioBuffer& clip, std::size_t target_len, std::size_t offset);
// Largest valid offset for RecycleFrom.
std::size_t MaxRecycleOffset(std::size_t clip_len, std::size_t target_len, int sample_rate);
std::size_t RecycleOffset(std::size_t clip_len, std::size_t target_len, int sample_rate,
                          std::uint64_t seed);
AudioBuffer Recycle(const AudioBuffer& clip, std::size_t target_len, std::uint64_t seed);
// Crossfade length in frames used by Recycle at this rate (0 when the clip is
// too short to fade).
std::size_t CrossfadeFrames(std::size_t clip_len, int sample_rate);

// Per-component stream seeds derived from the scene seed.
std::uint64_t ComponentSeed(std::uint64_t scene_seed, char component);

struct ComponentLevels {
  std::optional<double> speech, audio, noise, ventilation, mixture;
};

struct SceneResult {
  AudioBuffer mixture;  // Y
  AudioBuffer speech;   // S
  AudioBuffer audio;    // A
  AudioBuffer noise;    // N
  AudioBuffer ventilation;  // V
  std::vector<int> channels;
  SpeechGains speech_gains;
  double audio_gain = 0.0;
  // Levels at the reference channel when it is among the selected channels.
  std::optional<int> reference_channel;
  ComponentLevels levels_dba;
  double peak = 0.0;
  std::vector<std::string> warnings;
};

SceneResult Synthesize(const DatasetIndex& index, const SceneSpec& spec);

struct ImpulseResponse {
  SourcePosition position;
  int window_state;
  double calibration_level_dba;
  AudioBuffer ir;  // native rate, selected channels
};

std::vector<ImpulseResponse> ScenarioImpulseResponses(const DatasetIndex& index,
                                                      const SceneSpec& spec);

// Resamples an impulse response keeping its tap sum (DC gain).
AudioBuffer ResampleImpulseResponse(const AudioBuffer& ir, int target_rate);

}  // namespace carsynth

#endif  // CARSYNTH_SCENE_H_
