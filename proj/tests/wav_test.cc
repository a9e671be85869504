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

#include "carsynth/error.h"
#include "carsynth/wav.h"
#include "doctest.h"
#include "test_support.h"

namespace carsynth {
namespace {

AudioBuffer Ramp(int channels, std::size_t frames, int rate) {
  std::vector<std::vector<double>> data(static_cast<std::size_t>(channels), std::vector<double>(frames));
  for (int c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < frames; ++i) {
      data[static_cast<std::size_t>(c)][i] = std::sin(0.01 * i + c) * 0.9;
    }
  }
  return AudioBuffer::FromChannels(data, rate);
}

TEST_SUITE("wav") {

TEST_CASE("round trip within quantization") {
  const AudioBuffer a = Ramp(3, 1000, 44100);
  for (auto [fmt, tol] : {std::pair{SampleFormat::kPcm16, 1.0 / 32768.0},
                          {SampleFormat::kPcm24, 1.0 / 8388608.0},
                          {SampleFormat::kFloat32, 1e-7}}) {
    const AudioBuffer b = DecodeWav(EncodeWav(a, fmt));
    REQUIRE(b.channel_count() == 3);
    REQUIRE(b.frames() == 1000);
    CHECK(b.sample_rate() == 44100);
    CHECK(testing::MaxAbsDiff(a, b) <= tol);
  }
}

TEST_CASE("file round trip") {
  testing::TempDir dir;
  const AudioBuffer a = Ramp(8, 257, 16000);
  WriteWav(dir.path() / "x.wav", a, SampleFormat::kFloat32);
  CHECK(testing::MaxAbsDiff(ReadWav(dir.path() / "x.wav"), a) < 1e-7);
}

TEST_CASE("garbage is rejected") {
  std::vector<std::uint8_t> junk(64, 7);
  CHECK_THROWS_AS(DecodeWav(junk), IoError);
  auto bytes = EncodeWav(Ramp(1, 10, 8000), SampleFormat::kPcm16);
  bytes.resize(30);
  CHECK_THROWS_AS(DecodeWav(bytes), IoError);
}

TEST_CASE("missing file is an I/O error") {
  CHECK_THROWS_AS(ReadWav("/nonexistent/dir/a.wav"), IoError);
}

}  // TEST_SUITE

}  // namespace
}  // namespace carsynth
