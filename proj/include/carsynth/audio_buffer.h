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

#ifndef CARSYNTH_AUDIO_BUFFER_H_
#define CARSYNTH_AUDIO_BUFFER_H_

#include <cstddef>
#include <span>
#include <vector>

namespace carsynth {

// Multichannel block of full-scale-normalized samples at a fixed rate.
//
// Storage is channel-major: all frames of channel 0, then channel 1, ...
// Every channel has the same length, the rate is positive and at least one
// channel exists. Zero frames is allowed.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  // Zero-filled buffer.
  AudioBuffer(int channel_count, std::size_t frames, int sample_rate);

  // Throws InvalidArgument on ragged channels or non-finite samples.
  static AudioBuffer FromChannels(const std::vector<std::vector<double>>& data,
                                  int sample_rate);
  static AudioBuffer Mono(std::vector<double> samples, int sample_rate);

  int channel_count() const { return channels_; }
  std::size_t frames() const { return frames_; }
  int sample_rate() const { return sample_rate_; }
  bool empty() const { return frames_ == 0; }
  double duration_seconds() const {
    return sample_rate_ > 0 ? static_cast<double>(frames_) / sample_rate_ : 0.0;
  }

  std::span<double> channel(int c);
  std::span<const double> channel(int c) const;
  std::vector<double> channel_copy(int c) const;

  // New buffer holding the listed channels, in the listed order.
  AudioBuffer SelectChannels(std::span<const int> channels) const;
  // Frames [begin, begin + count) of every channel.
  AudioBuffer Slice(std::size_t begin, std::size_t count) const;

  void Scale(double gain);
  // Samplewise in-place addition; shapes and rates must match.
  void Add(const AudioBuffer& other);

  double Peak() const;
  bool AllFinite() const;
  bool IsSilent() const;

  friend bool operator==(const AudioBuffer& a, const AudioBuffer& b) = default;

 private:
  int channels_ = 0;
  std::size_t frames_ = 0;
  int sample_rate_ = 0;
  std::vector<double> data_;
};

}  // namespace carsynth

#endif  // CARSYNTH_AUDIO_BUFFER_H_
