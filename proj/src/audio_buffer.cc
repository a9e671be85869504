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

#include "carsynth/audio_buffer.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "carsynth/error.h"

namespace carsynth {

AudioBuffer::AudioBuffer(int channel_count, std::size_t frames, int sample_rate)
    : channels_(channel_count), frames_(frames), sample_rate_(sample_rate) {
  if (channel_count < 1) throw InvalidArgument("channel_count must be >= 1");
  if (sample_rate <= 0) throw InvalidArgument("sample_rate must be > 0");
  data_.assign(static_cast<std::size_t>(channel_count) * frames, 0.0);
}

AudioBuffer AudioBuffer::FromChannels(
    const std::vector<std::vector<double>>& data, int sample_rate) {
  if (data.empty()) throw InvalidArgument("channel_count must be >= 1");
  const std::size_t frames = data.front().size();
  AudioBuffer out(static_cast<int>(data.size()), frames, sample_rate);
  for (std::size_t c = 0; c < data.size(); ++c) {
    if (data[c].size() != frames) {
      throw InvalidArgument("channel " + std::to_string(c) +
                            " length differs from channel 0");
    }
    std::copy(data[c].begin(), data[c].end(),
              out.channel(static_cast<int>(c)).begin());
  }
  if (!out.AllFinite()) throw InvalidArgument("non-finite sample");
  return out;
}

AudioBuffer AudioBuffer::Mono(std::vector<double> samples, int sample_rate) {
  AudioBuffer out(1, 0, sample_rate);
  out.frames_ = samples.size();
  out.data_ = std::move(samples);
  if (!out.AllFinite()) throw InvalidArgument("non-finite sample");
  return out;
}

std::span<double> AudioBuffer::channel(int c) {
  if (c < 0 || c >= channels_) {
    throw InvalidArgument("channel index " + std::to_string(c) +
                          " out of range");
  }
  return {data_.data() + static_cast<std::size_t>(c) * frames_, frames_};
}

std::span<const double> AudioBuffer::channel(int c) const {
  if (c < 0 || c >= channels_) {
    throw InvalidArgument("channel index " + std::to_string(c) +
                          " out of range");
  }
  return {data_.data() + static_cast<std::size_t>(c) * frames_, frames_};
}

std::vector<double> AudioBuffer::channel_copy(int c) const {
  auto s = channel(c);
  return {s.begin(), s.end()};
}

AudioBuffer AudioBuffer::SelectChannels(std::span<const int> channels) const {
  if (channels.empty()) throw InvalidArgument("empty channel selection");
  AudioBuffer out(static_cast<int>(channels.size()), frames_, sample_rate_);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    auto src = channel(channels[i]);
    std::copy(src.begin(), src.end(), out.channel(static_cast<int>(i)).begin());
  }
  return out;
}

AudioBuffer AudioBuffer::Slice(std::size_t begin, std::size_t count) const {
  if (begin + count > frames_) throw InvalidArgument("slice out of range");
  AudioBuffer out(channels_, count, sample_rate_);
  for (int c = 0; c < channels_; ++c) {
    auto src = channel(c).subspan(begin, count);
    std::copy(src.begin(), src.end(), out.channel(c).begin());
  }
  return out;
}

void AudioBuffer::Scale(double gain) {
  for (double& v : data_) v *= gain;
}

void AudioBuffer::Add(const AudioBuffer& other) {
  if (other.channels_ != channels_ || other.frames_ != frames_ ||
      other.sample_rate_ != sample_rate_) {
    throw InvalidArgument("buffer shape mismatch in Add");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

double AudioBuffer::Peak() const {
  double peak = 0.0;
  for (double v : data_) peak = std::max(peak, std::abs(v));
  return peak;
}

bool AudioBuffer::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

bool AudioBuffer::IsSilent() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return v == 0.0; });
}

}  // namespace carsynth
