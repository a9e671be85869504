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

#include <algorithm>
#include <cmath>

#include "carsynth/error.h"
#include "carsynth/random.h"
#include "carsynth/scene.h"

namespace carsynth {

std::size_t CrossfadeFrames(std::size_t clip_len, int sample_rate) {
  const auto fade = static_cast<std::size_t>(std::lround(kCrossfadeSeconds * sample_rate));
  return clip_len < 2 * fade ? 0 : fade;
}

std::size_t MaxRecycleOffset(std::size_t clip_len, std::size_t target_len, int sample_rate) {
  if (clip_len >= target_len) return clip_len - target_len;
  return clip_len - CrossfadeFrames(clip_len, sample_rate) - 1;
}

std::size_t RecycleOffset(std::size_t clip_len, std::size_t target_len, int sample_rate,
                          std::uint64_t seed) {
  if (clip_len == 0) throw InvalidArgument("cannot recycle an empty clip");
  Rng rng(seed);
  return static_cast<std::size_t>(rng.Below(MaxRecycleOffset(clip_len, target_len, sample_rate)));
}

AudioBuffer RecycleFrom(const AudioBuffer& clip, std::size_t target_len, std::size_t offset) {
  const std::size_t len = clip.frames();
  if (len == 0) throw InvalidArgument("cannot recycle an empty clip");
  if (offset > MaxRecycleOffset(len, target_len, clip.sample_rate())) {
    throw InvalidArgument("recycle offset out of range");
  }
  if (len >= target_len) return clip.Slice(offset, target_len);

  const std::size_t fade = CrossfadeFrames(len, clip.sample_rate());
  const std::size_t period = len - fade;
  AudioBuffer out(clip.channel_count(), target_len, clip.sample_rate());
  for (int c = 0; c < clip.channel_count(); ++c) {
    const auto src = clip.channel(c);
    auto dst = out.channel(c);
    for (std::size_t i = 0; i < target_len; ++i) {
      const std::size_t q = offset + i;
      const std::size_t pass = q / period;
      const std::size_t j = q % period;
      if (pass > 0 && j < fade) {
        // Tail of the previous pass fading into the head of this one.
        const double a = (static_cast<double>(j) + 0.5) / static_cast<double>(fade);
        const double prev = src[period + j];
        dst[i] = prev + a * (src[j] - prev);
      } else {
        dst[i] = src[j];
      }
    }
  }
  return out;
}

AudioBuffer Recycle(const AudioBuffer& clip, std::size_t target_len, std::uint64_t seed) {
  return RecycleFrom(clip, target_len,
                     RecycleOffset(clip.frames(), target_len, clip.sample_rate(), seed));
}

std::uint64_t ComponentSeed(std::uint64_t scene_seed, char component) {
  return DeriveSeed(scene_seed, std::string("component:") + component);
}

}  // namespace carsynth
