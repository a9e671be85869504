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
#include <set>

#include "carsynth/error.h"
#include "carsynth/random.h"
#include "carsynth/scene.h"
#include "carsynth/scene_json.h"
#include "carsynth/wav.h"
#include "doctest.h"
#include "test_support.h"

namespace carsynth {
namespace {

SceneSpec SpeechOnly() {
  SceneSpec spec;
  spec.car = "fixture";
  spec.speech = testing::SpeechLike(2.0, 16000, 1);
  return spec;
}

std::string ErrorText(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

TEST_SUITE("scene") {

TEST_CASE("speech-only scene is exactly S with zero A/N/V") {
  const DatasetIndex& index = testing::SharedFixture();
  const SceneResult r = Synthesize(index, SpeechOnly());
  CHECK(r.mixture == r.speech);
  CHECK(r.audio.IsSilent());
  CHECK(r.noise.IsSilent());
  CHECK(r.ventilation.IsSilent());
  CHECK(r.mixture.channel_count() == 8);
  CHECK(r.mixture.sample_rate() == 16000);
  CHECK(r.warnings.empty());
}

TEST_CASE("adding noise does not perturb S") {
  const DatasetIndex& index = testing::SharedFixture();
  SceneSpec a = SpeechOnly();
  SceneSpec b = a;
  b.speed_kmh = 90;
  b.ventilation_level = 3;
  CHECK(Synthesize(index, a).speech == Synthesize(index, b).speech);
}

TEST_CASE("speech through identity IRs is the normalized, effort-scaled dry signal") {
  testing::TempDir dir;
  FixtureOptions opt;
  opt.identity_irs = true;
  opt.speed_grid_kmh = {0};
  opt.ventilation_levels = {1};
  GenerateFixture(dir.path(), opt);
  const DatasetIndex index = LoadDataset(dir.path());
  SceneSpec spec = SpeechOnly();
  spec.speech_effort_dba = 66.0;
  SpeechGains g;
  const AudioBuffer s = BuildSpeech(index, spec, &g);
  const Setup& setup = index.setup("fixture", SetupKind::kArray);
  const double cal = setup.FindImpulseResponse(SourcePosition::kDriver, 0)->calibration_level_dba;
  CHECK(g.effort == doctest::Approx(std::pow(10.0, (66.0 - cal) / 20.0)));
  // identity IR of amplitude 10^((60 - offset)/20): every channel reads Ls
  // plus the gap between whole-file and active level of x
  const double gap = AWeightedLevelDbfs(spec.speech, 0) - ActiveSpeechLevelDbfs(spec.speech);
  const double first = EquivalentLevel(s, setup.sensitivity, 0);
  CHECK(cal == 60.0);
  CHECK(first == doctest::Approx(66.0 + gap).epsilon(0.2 / 66.0));
  // IR amplitudes are stored as 24-bit PCM
  for (int c = 1; c < 8; ++c) CHECK(std::abs(EquivalentLevel(s, setup.sensitivity, c) - first) < 1e-3);
}

TEST_CASE("validation messages name the field") {
  const DatasetIndex& index = testing::SharedFixture();
  SceneSpec spec = SpeechOnly();
  spec.window_state = 5;
  CHECK(ErrorText([&] { ValidateSpec(spec); }) == "w must be an integer in [0,3] (got 5)");
  spec = SpeechOnly();
  spec.speech_effort_dba = -5;
  CHECK(ErrorText([&] { ValidateSpec(spec); }).find("Ls must be >= 0") != std::string::npos);
  spec = SpeechOnly();
  spec.ventilation_level = 4;
  CHECK(ErrorText([&] { ValidateSpec(spec); }).find("l must be") != std::string::npos);
  spec = SpeechOnly();
  spec.speed_kmh = 75;
  const std::string msg = ErrorText([&] { ValidateSpec(spec, index); });
  CHECK(msg.find("s=75") != std::string::npos);
  CHECK(msg.find("70") != std::string::npos);
  spec = SpeechOnly();
  spec.channels = {0, 9};
  CHECK_THROWS_AS(Synthesize(index, spec), InvalidArgument);
  spec = SpeechOnly();
  spec.speech = AudioBuffer(1, 100, 16000);
  CHECK_THROWS_AS(Synthesize(index, spec), InvalidArgument);
}

TEST_CASE("channel subset selects and orders") {
  const DatasetIndex& index = testing::SharedFixture();
  SceneSpec full = SpeechOnly();
  full.speed_kmh = 50;
  SceneSpec sub = full;
  sub.channels = {3, 0};
  const SceneResult a = Synthesize(index, full);
  const SceneResult b = Synthesize(index, sub);
  REQUIRE(b.mixture.channel_count() == 2);
  CHECK(testing::MaxAbsDiff(b.mixture.Slice(0, b.mixture.frames()),
                            a.mixture.SelectChannels(std::vector<int>{3, 0})) < 1e-12);
  CHECK(b.channels == std::vector<int>{3, 0});
  CHECK_FALSE(b.reference_channel.has_value());
  CHECK(a.reference_channel == 4);
}

TEST_CASE("scenario impulse responses") {
  const DatasetIndex& index = testing::SharedFixture();
  SceneSpec spec = SpeechOnly();
  CHECK(ScenarioImpulseResponses(index, spec).size() == 1);
  spec.audio_level_dba = 50;
  spec.audio_program = testing::SpeechLike(1.0, 16000, 2);
  spec.channels = {0, 3};
  const auto irs = ScenarioImpulseResponses(index, spec);
  REQUIRE(irs.size() == 2);
  CHECK(irs[1].position == SourcePosition::kAudioSystem);
  const AudioBuffer& full = index.setup("fixture", SetupKind::kArray).FindImpulseResponse(SourcePosition::kDriver, 0)->ir();
  CHECK(irs[0].ir == full.SelectChannels(std::vector<int>{0, 3}));
}

TEST_CASE("missing condition lists the available pairs") {
  testing::TempDir dir;
  FixtureOptions opt;
  opt.speed_grid_kmh = {0, 50};
  opt.ventilation_levels = {1};
  GenerateFixture(dir.path(), opt);
  const DatasetIndex index = LoadDataset(dir.path());
  SceneSpec spec = SpeechOnly();
  spec.speed_kmh = 60;
  const std::string msg = ErrorText([&] { Synthesize(index, spec); });
  CHECK(msg.find("50") != std::string::npos);
}

TEST_CASE("silent audio program warns and yields zero A") {
  const DatasetIndex& index = testing::SharedFixture();
  SceneSpec spec = SpeechOnly();
  spec.audio_level_dba = 60;
  spec.audio_program = AudioBuffer(2, 8000, 16000);
  const SceneResult r = Synthesize(index, spec);
  CHECK(r.audio.IsSilent());
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("loud scene warns with the peak") {
  const DatasetIndex& index = testing::SharedFixture();
  SceneSpec spec = SpeechOnly();
  spec.speech_effort_dba = 140;
  const SceneResult r = Synthesize(index, spec);
  REQUIRE(r.peak > 1.0);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("dBFS") != std::string::npos);
}

TEST_CASE("recycle: identity, excerpt and loop") {
  const AudioBuffer clip = AudioBuffer::Mono(testing::SpeechLike(1.0, 8000, 3).channel_copy(0), 8000);
  CHECK(RecycleFrom(clip, clip.frames(), 0) == clip);
  CHECK(MaxRecycleOffset(8000, 8000, 8000) == 0);
  const AudioBuffer ex = RecycleFrom(clip, 1000, 500);
  CHECK(ex == clip.Slice(500, 1000));

  const std::size_t fade = CrossfadeFrames(8000, 8000);
  CHECK(fade == 800);
  const std::size_t period = 8000 - fade;
  const AudioBuffer loop = RecycleFrom(clip, 20000, 0);
  REQUIRE(loop.frames() == 20000);
  // away from the seams the loop repeats with the period
  for (std::size_t i = fade; i < period; i += 37) {
    CHECK(loop.channel(0)[i + period] == clip.channel(0)[i]);
  }
}

TEST_CASE("recycle keeps a constant constant") {
  const AudioBuffer clip = AudioBuffer::Mono(std::vector<double>(5000, 0.25), 8000);
  for (std::size_t len : {100ul, 5000ul, 12500ul, 40001ul}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      const AudioBuffer r = Recycle(clip, len, seed);
      REQUIRE(r.frames() == len);
      for (double v : r.channel(0)) REQUIRE(v == 0.25);
    }
  }
}

TEST_CASE("recycle 2.5x has bounded seam steps") {
  std::vector<double> ramp(4000);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = std::sin(0.003 * i);
  const AudioBuffer clip = AudioBuffer::Mono(ramp, 8000);
  const AudioBuffer r = RecycleFrom(clip, 10000, 0);
  double max_step_in = 0.0, max_step_out = 0.0;
  for (std::size_t i = 1; i < ramp.size(); ++i) max_step_in = std::max(max_step_in, std::abs(ramp[i] - ramp[i - 1]));
  for (std::size_t i = 1; i < r.frames(); ++i) {
    max_step_out = std::max(max_step_out, std::abs(r.channel(0)[i] - r.channel(0)[i - 1]));
  }
  // linear fade of two slowly varying signals: step bounded by the signal
  // slope plus the seam mismatch spread over the fade
  CHECK(max_step_out <= max_step_in + 2.0 / CrossfadeFrames(4000, 8000) + 1e-12);
}

TEST_CASE("recycle offsets are seeded and in range") {
  std::set<std::size_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const std::size_t o = RecycleOffset(80000, 16000, 16000, s);
    CHECK(o <= MaxRecycleOffset(80000, 16000, 16000));
    CHECK(o == RecycleOffset(80000, 16000, 16000, s));
    seen.insert(o);
  }
  CHECK(seen.size() > 40);
  CHECK(ComponentSeed(1, 'N') != ComponentSeed(1, 'V'));
}

TEST_CASE("different seeds change noise, not speech") {
  const DatasetIndex& index = testing::SharedFixture();
  SceneSpec a = SpeechOnly();
  a.speed_kmh = 60;
  SceneSpec b = a;
  b.seed = a.seed + 1;
  const SceneResult ra = Synthesize(index, a), rb = Synthesize(index, b);
  CHECK(ra.speech == rb.speech);
  CHECK_FALSE(ra.noise == rb.noise);
}

TEST_CASE("IR resampling keeps the tap sum") {
  // bulk delay first, like a measured response
  std::vector<double> h(1200, 0.0);
  for (std::size_t i = 0; i + 200 < h.size(); ++i) h[i + 200] = std::exp(-0.02 * i) * std::cos(0.3 * i);
  const AudioBuffer ir = AudioBuffer::Mono(h, 48000);
  const AudioBuffer r = ResampleImpulseResponse(ir, 16000);
  double s0 = 0.0, s1 = 0.0;
  for (double v : h) s0 += v;
  for (double v : r.channel(0)) s1 += v;
  CHECK(s1 == doctest::Approx(s0).epsilon(1e-6));
}

TEST_CASE("spec JSON parsing") {
  testing::TempDir dir;
  WriteWav(dir.path() / "x.wav", testing::SpeechLike(1.0, 16000, 4));
  nlohmann::ordered_json doc = {{"car", "fixture"}, {"setup", "distributed"}, {"p", "rear_left"},
                                {"Ls", 65}, {"w", 2}, {"x", "x.wav"}, {"s", 80}, {"channels", {1, 2}}};
  const SceneSpec spec = SceneSpecFromJson(doc, dir.path());
  CHECK(spec.setup == SetupKind::kDistributed);
  CHECK(spec.position == SourcePosition::kRearLeft);
  CHECK(spec.speech_effort_dba == 65);
  CHECK(spec.speed_kmh == 80);
  CHECK(spec.channels == std::vector<int>{1, 2});
  doc["bogus"] = 1;
  CHECK_THROWS_AS(SceneSpecFromJson(doc, dir.path()), InvalidArgument);
}

}  // TEST_SUITE

}  // namespace
}  // namespace carsynth
