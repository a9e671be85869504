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

#include <fstream>

#include "carsynth/dataset.h"
#include "carsynth/error.h"
#include "carsynth/wav.h"
#include "doctest.h"
#include "json.hpp"
#include "test_support.h"

namespace carsynth {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Mutable copy of the shared fixture.
struct FixtureCopy {
  testing::TempDir dir{"carsynth-copy"};
  FixtureCopy() {
    fs::copy(testing::SharedFixtureRoot(), dir.path(), fs::copy_options::recursive);
  }
  fs::path root() const { return dir.path(); }
  json manifest() const {
    std::ifstream in(root() / kManifestName);
    return json::parse(in);
  }
  void set_manifest(const json& j) const {
    std::ofstream out(root() / kManifestName, std::ios::trunc);
    out << j.dump(2);
  }
};

TEST_SUITE("dataset") {

TEST_CASE("enum names round trip") {
  for (auto p : {SourcePosition::kDriver, SourcePosition::kFrontPassenger, SourcePosition::kRearLeft,
                 SourcePosition::kRearMiddle, SourcePosition::kRearRight, SourcePosition::kAudioSystem}) {
    CHECK(ParseSourcePosition(ToString(p)) == p);
  }
  CHECK(ParseSetupKind("distributed") == SetupKind::kDistributed);
  CHECK_THROWS_AS(ParseSetupKind("ring"), InvalidArgument);
  CHECK(PassengerPositions().size() == 5);
}

TEST_CASE("fixture loads with both setups and full coverage") {
  const DatasetIndex& index = testing::SharedFixture();
  REQUIRE(index.cars().size() == 1);
  const Car& car = index.cars()[0];
  CHECK(car.has_audio_system);
  for (SetupKind k : {SetupKind::kArray, SetupKind::kDistributed}) {
    const Setup& s = index.setup(car.id, k);
    CHECK(s.channel_count == 8);
    CHECK(s.impulse_responses.size() == 6 * s.window_states.size());
    CHECK(s.sensitivity.size() == 8);
    for (int w : s.window_states) {
      for (int v : s.speed_grid_kmh) CHECK(s.FindDriving(v, w) != nullptr);
      for (int l : s.ventilation_levels) CHECK(s.FindVentilation(l, w) != nullptr);
    }
  }
  CHECK(index.setup(car.id, SetupKind::kArray).reference_channel == 4);
  CHECK(index.setup(car.id, SetupKind::kDistributed).reference_channel == 2);
  CHECK(Validate(index).empty());
}

TEST_CASE("unknown car and setup list what exists") {
  const DatasetIndex& index = testing::SharedFixture();
  try {
    index.car("nope");
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(std::string(e.what()).find("fixture") != std::string::npos);
  }
}

TEST_CASE("fixture noise clips carry their declared levels") {
  const DatasetIndex& index = testing::SharedFixture();
  const Setup& s = index.setup("fixture", SetupKind::kArray);
  for (int c : {0, 4, 7}) {
    CHECK(EquivalentLevel(s.FindDriving(70, 1)->clip(), s.sensitivity, c) ==
          doctest::Approx(FixtureDrivingLevel(70, 1)).epsilon(1e-4));
    CHECK(EquivalentLevel(s.FindVentilation(2, 3)->clip(), s.sensitivity, c) ==
          doctest::Approx(FixtureVentilationLevel(2, 3)).epsilon(1e-4));
  }
  CHECK(s.FindDriving(70, 0)->clip().duration_seconds() >= kMinStationarySeconds);
}

TEST_CASE("fixture generation is deterministic") {
  FixtureOptions small;
  small.speed_grid_kmh = {0, 50};
  small.ventilation_levels = {1};
  small.noise_seconds = 5.0;
  testing::TempDir a, b;
  GenerateFixture(a.path(), small);
  GenerateFixture(b.path(), small);
  for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const fs::path other = b.path() / fs::relative(entry.path(), a.path());
    REQUIRE(fs::exists(other));
    CHECK(ReadFileBytes(entry.path()) == ReadFileBytes(other));
  }
}

TEST_CASE("missing manifest") {
  testing::TempDir empty;
  try {
    LoadDataset(empty.path());
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(e.kind() == ManifestError::Kind::kMissingManifest);
  }
}

TEST_CASE("malformed manifest") {
  FixtureCopy fx;
  std::ofstream(fx.root() / kManifestName, std::ios::trunc) << "{ not json";
  try {
    LoadDataset(fx.root());
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(e.kind() == ManifestError::Kind::kMalformed);
  }
}

TEST_CASE("duplicate catalog key") {
  FixtureCopy fx;
  json m = fx.manifest();
  auto& irs = m["cars"][0]["setups"][0]["impulse_responses"];
  irs.push_back(irs[0]);
  fx.set_manifest(m);
  try {
    LoadDataset(fx.root());
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(e.kind() == ManifestError::Kind::kDuplicateKey);
  }
}

TEST_CASE("deleted file: strict load fails, validate reports one missing combination") {
  FixtureCopy fx;
  fs::remove(fx.root() / "fixture/array/noise/driving_s70_w1.wav");
  try {
    LoadDataset(fx.root());
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(e.kind() == ManifestError::Kind::kDanglingReference);
  }
  const DatasetIndex lenient = LoadDataset(fx.root(), LoadOptions{false});
  REQUIRE(lenient.dangling().size() == 1);
  const ValidationReport r = Validate(lenient);
  CHECK(r.findings.size() == 1);
  CHECK(r.count(Finding::Kind::kMissingNoise) == 1);
  CHECK(r.findings[0].message.find("s=70") != std::string::npos);
}

TEST_CASE("deleted IR shows as missing impulse response") {
  FixtureCopy fx;
  fs::remove(fx.root() / "fixture/distributed/ir/rear_left_w2.wav");
  const ValidationReport r = Validate(LoadDataset(fx.root(), LoadOptions{false}));
  CHECK(r.findings.size() == 1);
  CHECK(r.count(Finding::Kind::kMissingImpulseResponse) == 1);
}

TEST_CASE("clipping, silent channel, short clip and format findings") {
  FixtureCopy fx;
  {
    const fs::path p = fx.root() / "fixture/array/noise/driving_s50_w0.wav";
    AudioBuffer a = ReadWav(p);
    for (int i = 100; i < 110; ++i) a.channel(3)[static_cast<std::size_t>(i)] = 1.0;
    WriteWav(p, a);
  }
  {
    const fs::path p = fx.root() / "fixture/array/ir/driver_w0.wav";
    AudioBuffer a = ReadWav(p);
    for (double& v : a.channel(6)) v = 0.0;
    WriteWav(p, a);
  }
  {
    const fs::path p = fx.root() / "fixture/array/noise/ventilation_l1_w0.wav";
    WriteWav(p, ReadWav(p).Slice(0, 16000));
  }
  {
    const fs::path p = fx.root() / "fixture/array/noise/driving_s60_w0.wav";
    const AudioBuffer a = ReadWav(p);
    std::vector<int> five = {0, 1, 2, 3, 4};
    WriteWav(p, a.SelectChannels(five));
  }
  const ValidationReport r = Validate(LoadDataset(fx.root()));
  CHECK(r.count(Finding::Kind::kClipping) == 1);
  CHECK(r.count(Finding::Kind::kSilentChannel) == 1);
  CHECK(r.count(Finding::Kind::kShortClip) == 1);
  CHECK(r.count(Finding::Kind::kFormatMismatch) >= 1);
}

TEST_CASE("a short run at full scale is not clipping") {
  FixtureCopy fx;
  const fs::path p = fx.root() / "fixture/array/noise/driving_s50_w0.wav";
  AudioBuffer a = ReadWav(p);
  a.channel(0)[10] = 1.0;
  a.channel(0)[11] = 1.0;
  WriteWav(p, a);
  CHECK(Validate(LoadDataset(fx.root())).count(Finding::Kind::kClipping) == 0);
}

TEST_CASE("sensitivity update persists") {
  FixtureCopy fx;
  UpdateManifestSensitivity(fx.root(), "fixture", SetupKind::kDistributed, 5, 101.25);
  const DatasetIndex index = LoadDataset(fx.root());
  const Setup& s = index.setup("fixture", SetupKind::kDistributed);
  CHECK(s.sensitivity.offset(5) == 101.25);
  CHECK(s.sensitivity.offset(4) == testing::SharedFixture().setup("fixture", SetupKind::kDistributed).sensitivity.offset(4));
  CHECK_THROWS(UpdateManifestSensitivity(fx.root(), "fixture", SetupKind::kDistributed, 9, 1.0));
}

TEST_CASE("estimate sensitivity inverts the level") {
  std::vector<double> x(48000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.1 * std::sin(2.0 * testing::kPi * 1000.0 * i / 48000.0);
  const AudioBuffer rec = AudioBuffer::Mono(x, 48000);
  // 0.1 amplitude sine at 1 kHz: -23.0103 dBFS A-weighted
  CHECK(EstimateSensitivity(rec, 0, 94.0) == doctest::Approx(94.0 + 23.0103).epsilon(1e-4));
}

}  // TEST_SUITE

}  // namespace
}  // namespace carsynth
