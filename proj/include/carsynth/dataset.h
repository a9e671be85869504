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

#ifndef CARSYNTH_DATASET_H_
#define CARSYNTH_DATASET_H_

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carsynth/audio_buffer.h"
#include "carsynth/dsp.h"
#include "carsynth/error.h"

namespace carsynth {

enum class SourcePosition {
  kDriver,
  kFrontPassenger,
  kRearLeft,
  kRearMiddle,
  kRearRight,
  kAudioSystem,
};

std::string_view ToString(SourcePosition p);
// Accepts the snake_case names produced by ToString.
SourcePosition ParseSourcePosition(std::string_view name);
// The five talker seats, in declaration order.
const std::vector<SourcePosition>& PassengerPositions();

enum class SetupKind { kArray, kDistributed };
std::string_view ToString(SetupKind k);
SetupKind ParseSetupKind(std::string_view name);

enum class NoiseKind { kDriving, kVentilation, kEvent };
std::string_view ToString(NoiseKind k);
NoiseKind ParseNoiseKind(std::string_view name);

constexpr int kPhysicalChannels = 8;
constexpr double kMinStationarySeconds = 5.0;

// WAV file decoded on first access. Safe to share between threads; the
// file is decoded at most once per successful load.
class LazyAudio {
 public:
  explicit LazyAudio(std::filesystem::path path) : path_(std::move(path)) {}
  // Already-decoded payload, no file behind it.
  explicit LazyAudio(AudioBuffer audio);

  const std::filesystem::path& path() const { return path_; }
  const AudioBuffer& Get() const;
  bool loaded() const;

 private:
  std::filesystem::path path_;
  mutable std::once_flag once_;
  mutable std::atomic<bool> loaded_{false};
  mutable AudioBuffer audio_;
};

struct ImpulseResponseSet {
  SourcePosition position = SourcePosition::kDriver;
  int window_state = 0;
  // Level of the measurement source, dBA at 1 m.
  double calibration_level_dba = 60.0;
  std::string file;  // relative to the dataset root
  std::shared_ptr<const LazyAudio> audio;

  const AudioBuffer& ir() const { return audio->Get(); }
};

struct NoiseClip {
  NoiseKind kind = NoiseKind::kDriving;
  std::optional<int> speed_kmh;          // driving only
  std::optional<int> ventilation_level;  // ventilation only
  int window_state = 0;
  std::string annotation;  // event clips
  std::string file;
  std::shared_ptr<const LazyAudio> audio;

  const AudioBuffer& clip() const { return audio->Get(); }
};

using MicPosition = std::array<double, 3>;

struct Setup {
  SetupKind kind = SetupKind::kArray;
  int channel_count = kPhysicalChannels;
  int reference_channel = 0;
  SensitivityMap sensitivity;
  // Required for the array setup, optional otherwise.
  std::optional<std::vector<MicPosition>> mic_positions;
  double speed_of_sound = 343.0;
  std::vector<int> window_states;
  std::vector<int> speed_grid_kmh;
  std::vector<int> ventilation_levels;
  std::vector<SourcePosition> source_positions;
  std::vector<ImpulseResponseSet> impulse_responses;
  std::vector<NoiseClip> noise_clips;

  const ImpulseResponseSet* FindImpulseResponse(SourcePosition p, int w) const;
  const NoiseClip* FindDriving(int speed_kmh, int w) const;
  const NoiseClip* FindVentilation(int level, int w) const;
};

struct Car {
  std::string id;
  std::string brand;
  std::string model;
  int year = 0;
  bool has_audio_system = false;
  std::vector<Setup> setups;

  const Setup* FindSetup(SetupKind kind) const;
};

// A manifest entry whose file was absent when loading leniently.
struct DanglingReference {
  std::string car;
  SetupKind setup = SetupKind::kArray;
  std::string file;
  std::string key;  // human-readable catalog key
};

class DatasetIndex {
 public:
  DatasetIndex() = default;
  DatasetIndex(std::filesystem::path root, std::vector<Car> cars,
               std::vector<DanglingReference> dangling = {});

  const std::filesystem::path& root() const { return root_; }
  const std::vector<Car>& cars() const { return cars_; }
  const std::vector<DanglingReference>& dangling() const { return dangling_; }

  // Throw DatasetError naming what is available when the lookup fails.
  const Car& car(std::string_view id) const;
  const Setup& setup(std::string_view car_id, SetupKind kind) const;

 private:
  std::filesystem::path root_;
  std::vector<Car> cars_;
  std::vector<DanglingReference> dangling_;
};

// Raised by LoadDataset. `path()` names the offending file.
class ManifestError : public IoError {
 public:
  enum class Kind { kMissingManifest, kMalformed, kDanglingReference, kDuplicateKey };
  ManifestError(Kind kind, std::filesystem::path path, const std::string& what);

  Kind kind() const { return kind_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  Kind kind_;
  std::filesystem::path path_;
};

inline constexpr const char* kManifestName = "manifest.json";

struct LoadOptions {
  // When false, entries whose file is missing are dropped from the catalog
  // and listed in DatasetIndex::dangling() instead of failing the load.
  bool strict = true;
};

DatasetIndex LoadDataset(const std::filesystem::path& root,
                         const LoadOptions& options = {});

struct ValidationOptions {
  // Runs of at least this many samples at or beyond `clip_level` count as
  // clipping. The default level is the positive full scale of 16-bit PCM,
  // so saturated 16- and 24-bit files are both caught.
  int clip_run = 3;
  double clip_level = 1.0 - 1.0 / 32768.0;
};

struct Finding {
  enum class Kind {
    kMissingImpulseResponse,
    kMissingNoise,
    kFormatMismatch,
    kClipping,
    kSilentChannel,
    kShortClip,
    kUnreadable,
  };
  Kind kind;
  std::string car;
  std::string setup;
  std::string file;
  std::string message;
};

std::string_view ToString(Finding::Kind k);

struct ValidationReport {
  std::vector<Finding> findings;
  bool empty() const { return findings.empty(); }
  std::size_t count(Finding::Kind kind) const;
};

// Checks coverage of the declared grids, format consistency and clipping.
// Reads every audio file but never modifies the index beyond its decode
// cache.
ValidationReport Validate(const DatasetIndex& index,
                          const ValidationOptions& options = {});

// reference_dba - A-weighted dBFS of `channel`. Throws on silence.
double EstimateSensitivity(const AudioBuffer& calibration_recording, int channel,
                           double reference_dba);

// Rewrites sensitivity_db[channel] of one setup in the manifest, keeping all
// other content and key order.
void UpdateManifestSensitivity(const std::filesystem::path& root,
                               std::string_view car_id, SetupKind setup,
                               int channel, double offset_db);

struct FixtureOptions {
  std::uint64_t seed = 1;
  double noise_seconds = 5.0;
  int noise_rate = 16000;
  int ir_rate = 48000;
  std::vector<int> speed_grid_kmh = {0, 50, 60, 70, 80, 90, 100, 110};
  std::vector<int> ventilation_levels = {1, 2, 3};
  // Single-delta IRs whose gain maps a 0 dBFS source straight to the
  // calibration level at every microphone.
  bool identity_irs = false;
};

// Writes a complete miniature dataset (one synthetic car, both setups) under
// `root`. Byte-identical for equal options.
void GenerateFixture(const std::filesystem::path& root,
                     const FixtureOptions& options = {});

// Level the fixture gives driving / ventilation noise at a channel whose
// offset is the setup's reference, dBA.
double FixtureDrivingLevel(int speed_kmh, int window_state);
double FixtureVentilationLevel(int level, int window_state);

}  // namespace carsynth

#endif  // CARSYNTH_DATASET_H_
