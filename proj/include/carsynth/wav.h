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

#ifndef CARSYNTH_WAV_H_
#define CARSYNTH_WAV_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "carsynth/audio_buffer.h"

namespace carsynth {

enum class SampleFormat { kPcm16, kPcm24, kFloat32 };

// RIFF/WAVE codec. Reads integer PCM (16/24/32 bit), IEEE float (32/64 bit)
// and WAVE_FORMAT_EXTENSIBLE wrappers of those; writes little-endian packed
// PCM16, PCM24 or float32. Integer samples are scaled by 2^(bits-1), and
// out-of-range values are clamped when encoding.
AudioBuffer DecodeWav(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> EncodeWav(const AudioBuffer& buf,
                                    SampleFormat format);

AudioBuffer ReadWav(const std::filesystem::path& path);
void WriteWav(const std::filesystem::path& path, const AudioBuffer& buf,
              SampleFormat format = SampleFormat::kPcm24);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);

}  // namespace carsynth

#endif  // CARSYNTH_WAV_H_
