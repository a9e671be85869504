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

#include "carsynth/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "carsynth/wav.h"
#include "json.hpp"

namespace carsynth {
namespace {

using json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 6> kPositionNames = {
    "driver", "front_passenger", "rear_left", "rear_middle", "rear_right", "audio_system"};

template <typename T>
T Required(const json& obj, const char* key, const std::filesystem::path& path,
           const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ManifestError(ManifestError::Kind::kMalformed, path,
                        where + ": missing field \"" + key + "\"");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ManifestError(ManifestError::Kind::kMalformed, path,
                        where + ": field \"" + key + "\": " + e.what());
  }
}

template <typename T>
T Optional(const json& obj, const char* key, T fallback,
           const std::filesystem::path& path, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return Required<T>(obj, key, path, where);
}

}  // namespace

std::string_view ToString(SourcePosition p) {
  return kPositionNames[static_cast<std::size_t>(p)];
}

SourcePosition ParseSourcePosition(std::string_view name) {
  for (std::size_t i = 0; i < kPositionNames.size(); ++i) {
    if (kPositionNames[i] == name) return static_cast<SourcePosition>(i);
  }
  std::string msg = "unknown source position p=\"" + std::string(name) + "\" (expected one of";
  for (auto n : kPositionNames) msg += " " + std::string(n);
  throw InvalidArgument(msg + ")");
}

const std::vector<SourcePosition>& PassengerPositions() {
  static const std::vector<SourcePosition> kAll = {
      SourcePosition::kDriver, SourcePosition::kFrontPassenger, SourcePosition::kRearLeft,
      SourcePosition::kRearMiddle, SourcePosition::kRearRight};
  return kAll;
}

std::string_view ToString(SetupKind k) {
  return k == SetupKind::kArray ? "array" : "distributed";
}

SetupKind ParseSetupKind(std::string_view name) {
  if (name == "array") return SetupKind::kArray;
  if (name == "distributed") return SetupKind::kDistributed;
  throw InvalidArgument("unknown setup \"" + std::string(name) +
                        "\" (expected array or distributed)");
}

std::string_view ToString(NoiseKind k) {
  switch (k) {
    case NoiseKind::kDriving: return "driving";
    case NoiseKind::kVentilation: return "ventilation";
    case NoiseKind::kEvent: return "event";
  }
  return "?";
}

NoiseKind ParseNoiseKind(std::string_view name) {
  if (name == "driving") return NoiseKind::kDriving;
  if (name == "ventilation") return NoiseKind::kVentilation;
  if (name == "event") return NoiseKind::kEvent;
  throw InvalidArgument("unknown noise kind \"" + std::string(name) + "\"");
}

LazyAudio::LazyAudio(AudioBuffer audio) : audio_(std::move(audio)) {
  std::call_once(once_, [] {});
  loaded_ = true;
}

const AudioBuffer& LazyAudio::Get() const {
  std::call_once(once_, [this] {
    audio_ = ReadWav(path_);
    loaded_ = true;
  });
  return audio_;
}

bool LazyAudio::loaded() const { return loaded_; }

const ImpulseResponseSet* Setup::FindImpulseResponse(SourcePosition p, int w) const {
  for (const auto& ir : impulse_responses) {
    if (ir.position == p && ir.window_state == w) return &ir;
  }
  return nullptr;
}

const NoiseClip* Setup::FindDriving(int speed_kmh, int w) const {
  for (const auto& n : noise_clips) {
    if (n.kind == NoiseKind::kDriving && n.speed_kmh == speed_kmh && n.window_state == w) return &n;
  }
  return nullptr;
}

const NoiseClip* Setup::FindVentilation(int level, int w) const {
  for (const auto& n : noise_clips) {
    if (n.kind == NoiseKind::kVentilation && n.ventilation_level == level &&
        n.window_state == w) {
      return &n;
    }
  }
  return nullptr;
}

const Setup* Car::FindSetup(SetupKind kind) const {
  for (const auto& s : setups) {
    if (s.kind == kind) return &s;
  }
  return nullptr;
}

DatasetIndex::DatasetIndex(std::filesystem::path root, std::vector<Car> cars,
                           std::vector<DanglingReference> dangling)
    : root_(std::move(root)), cars_(std::move(cars)), dangling_(std::move(dangling)) {}

const Car& DatasetIndex::car(std::string_view id) const {
  for (const auto& c : cars_) {
    if (c.id == id) return c;
  }
  std::string msg = "unknown car \"" + std::string(id) + "\"; available:";
  for (const auto& c : cars_) msg += " " + c.id;
  throw DatasetError(msg);
}

const Setup& DatasetIndex::setup(std::string_view car_id, SetupKind kind) const {
  const Car& c = car(car_id);
  if (const Setup* s = c.FindSetup(kind)) return *s;
  std::string msg = "car \"" + c.id + "\" has no " + std::string(ToString(kind)) +
                    " setup; available:";
  for (const auto& s : c.setups) msg += " " + std::string(ToString(s.kind));
  throw DatasetError(msg);
}

ManifestError::ManifestError(Kind kind, std::filesystem::path path, const std::string& what)
    : IoError(what), kind_(kind), path_(std::move(path)) {}

DatasetIndex LoadDataset(const std::filesystem::path& root, const LoadOptions& options) {
  const std::filesystem::path manifest_path = root / kManifestName;
  std::ifstream in(manifest_path);
  if (!in) {
    throw ManifestError(ManifestError::Kind::kMissingManifest, manifest_path,
                        "missing manifest: " + manifest_path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ManifestError(ManifestError::Kind::kMalformed, manifest_path,
                        "malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  const auto& mp = manifest_path;
  auto malformed = [&](const std::string& what) {
    return ManifestError(ManifestError::Kind::kMalformed, mp,
                         "malformed manifest " + mp.string() + ": " + what);
  };
  if (!doc.is_object() || !doc.contains("cars") || !doc["cars"].is_array()) {
    throw malformed("expected an object with a \"cars\" array");
  }

  std::vector<Car> cars;
  std::vector<DanglingReference> dangling;
  std::set<std::string> car_ids;
  for (const json& jc : doc["cars"]) {
    Car car;
    car.id = Required<std::string>(jc, "id", mp, "car");
    const std::string where = "car " + car.id;
    if (!car_ids.insert(car.id).second) {
      throw ManifestError(ManifestError::Kind::kDuplicateKey, mp,
                          "duplicate catalog key: car " + car.id);
    }
    car.brand = Optional<std::string>(jc, "brand", "", mp, where);
    car.model = Optional<std::string>(jc, "model", "", mp, where);
    car.year = Optional<int>(jc, "year", 0, mp, where);
    car.has_audio_system = Optional<bool>(jc, "audio_system", false, mp, where);
    if (!jc.contains("setups") || !jc["setups"].is_array()) throw malformed(where + ": missing setups");

    for (const json& js : jc["setups"]) {
      Setup setup;
      const std::string name = Required<std::string>(js, "name", mp, where);
      try {
        setup.kind = ParseSetupKind(name);
      } catch (const InvalidArgument& e) {
        throw malformed(where + ": " + e.what());
      }
      const std::string swhere = where + " setup " + name;
      if (car.FindSetup(setup.kind)) {
        throw ManifestError(ManifestError::Kind::kDuplicateKey, mp,
                            "duplicate catalog key: " + swhere);
      }
      setup.channel_count = Required<int>(js, "channels", mp, swhere);
      if (setup.channel_count != kPhysicalChannels) {
        throw malformed(swhere + ": setups declare " + std::to_string(kPhysicalChannels) +
                        " channels, got " + std::to_string(setup.channel_count));
      }
      setup.reference_channel = Required<int>(js, "reference_channel", mp, swhere);
      if (setup.reference_channel < 0 || setup.reference_channel >= setup.channel_count) {
        throw malformed(swhere + ": reference_channel out of range");
      }
      const auto offsets = Required<std::vector<double>>(js, "sensitivity_db", mp, swhere);
      if (static_cast<int>(offsets.size()) != setup.channel_count) {
        throw malformed(swhere + ": sensitivity_db needs one entry per channel");
      }
      try {
        setup.sensitivity = SensitivityMap(offsets);
      } catch (const InvalidArgument& e) {
        throw malformed(swhere + ": " + e.what());
      }
      if (js.contains("geometry")) {
        const json& g = js["geometry"];
        setup.speed_of_sound = Optional<double>(g, "speed_of_sound", 343.0, mp, swhere);
        auto pos = Required<std::vector<MicPosition>>(g, "positions", mp, swhere + " geometry");
        if (static_cast<int>(pos.size()) != setup.channel_count) {
          throw malformed(swhere + ": geometry needs one position per channel");
        }
        setup.mic_positions = std::move(pos);
      } else if (setup.kind == SetupKind::kArray) {
        throw malformed(swhere + ": array setup requires geometry");
      }
      setup.window_states = Optional<std::vector<int>>(js, "window_states", {0, 1, 2, 3}, mp, swhere);
      for (int w : setup.window_states) {
        if (w < 0 || w > 3) throw malformed(swhere + ": window state " + std::to_string(w) + " outside 0..3");
      }
      setup.speed_grid_kmh = Optional<std::vector<int>>(js, "speed_grid_kmh", {}, mp, swhere);
      setup.ventilation_levels = Optional<std::vector<int>>(js, "ventilation_levels", {}, mp, swhere);
      for (int l : setup.ventilation_levels) {
        if (l < 1 || l > 3) throw malformed(swhere + ": ventilation level " + std::to_string(l) + " outside 1..3");
      }
      std::vector<std::string> positions = Optional<std::vector<std::string>>(
          js, "source_positions", {}, mp, swhere);
      try {
        for (const auto& p : positions) setup.source_positions.push_back(ParseSourcePosition(p));
      } catch (const InvalidArgument& e) {
        throw malformed(swhere + ": " + e.what());
      }

      auto resolve = [&](const std::string& rel, const std::string& key) -> std::shared_ptr<const LazyAudio> {
        const auto full = root / rel;
        if (!std::filesystem::is_regular_file(full)) {
          if (options.strict) {
            throw ManifestError(ManifestError::Kind::kDanglingReference, full,
                                "dangling file reference: " + full.string() + " (" + key + ")");
          }
          dangling.push_back({car.id, setup.kind, rel, key});
          return nullptr;
        }
        return std::make_shared<const LazyAudio>(full);
      };

      std::set<std::pair<SourcePosition, int>> ir_keys;
      for (const json& ji : js.value("impulse_responses", json::array())) {
        ImpulseResponseSet ir;
        try {
          ir.position = ParseSourcePosition(Required<std::string>(ji, "position", mp, swhere));
        } catch (const InvalidArgument& e) {
          throw malformed(swhere + ": " + e.what());
        }
        ir.window_state = Required<int>(ji, "window", mp, swhere);
        ir.calibration_level_dba = Required<double>(ji, "calibration_dba", mp, swhere);
        if (!(ir.calibration_level_dba > 0)) throw malformed(swhere + ": calibration_dba must be > 0");
        ir.file = Required<std::string>(ji, "file", mp, swhere);
        const std::string key = "ir p=" + std::string(ToString(ir.position)) +
                                " w=" + std::to_string(ir.window_state);
        if (!ir_keys.insert({ir.position, ir.window_state}).second) {
          throw ManifestError(ManifestError::Kind::kDuplicateKey, mp,
                              "duplicate catalog key: " + swhere + " " + key);
        }
        ir.audio = resolve(ir.file, key);
        if (ir.audio) setup.impulse_responses.push_back(std::move(ir));
      }

      std::set<std::tuple<int, int, int>> noise_keys;
      for (const json& jn : js.value("noise", json::array())) {
        NoiseClip clip;
        try {
          clip.kind = ParseNoiseKind(Required<std::string>(jn, "kind", mp, swhere));
        } catch (const InvalidArgument& e) {
          throw malformed(swhere + ": " + e.what());
        }
        clip.window_state = Required<int>(jn, "window", mp, swhere);
        clip.file = Required<std::string>(jn, "file", mp, swhere);
        std::string key = std::string(ToString(clip.kind)) + " w=" + std::to_string(clip.window_state);
        if (clip.kind == NoiseKind::kDriving) {
          if (jn.contains("level")) throw malformed(swhere + ": driving clip " + clip.file + " carries a ventilation level");
          clip.speed_kmh = Required<int>(jn, "speed_kmh", mp, swhere);
          if (std::find(setup.speed_grid_kmh.begin(), setup.speed_grid_kmh.end(), *clip.speed_kmh) ==
              setup.speed_grid_kmh.end()) {
            throw malformed(swhere + ": speed " + std::to_string(*clip.speed_kmh) +
                            " of " + clip.file + " is not in speed_grid_kmh");
          }
          key += " s=" + std::to_string(*clip.speed_kmh);
          if (!noise_keys.insert({0, *clip.speed_kmh, clip.window_state}).second) {
            throw ManifestError(ManifestError::Kind::kDuplicateKey, mp,
                                "duplicate catalog key: " + swhere + " " + key);
          }
        } else if (clip.kind == NoiseKind::kVentilation) {
          if (jn.contains("speed_kmh")) throw malformed(swhere + ": ventilation clip " + clip.file + " carries a speed");
          clip.ventilation_level = Required<int>(jn, "level", mp, swhere);
          if (std::find(setup.ventilation_levels.begin(), setup.ventilation_levels.end(),
                        *clip.ventilation_level) == setup.ventilation_levels.end()) {
            throw malformed(swhere + ": ventilation level of " + clip.file +
                            " is not in ventilation_levels");
          }
          key += " l=" + std::to_string(*clip.ventilation_level);
          if (!noise_keys.insert({1, *clip.ventilation_level, clip.window_state}).second) {
            throw ManifestError(ManifestError::Kind::kDuplicateKey, mp,
                                "duplicate catalog key: " + swhere + " " + key);
          }
        } else {
          clip.annotation = Optional<std::string>(jn, "annotation", "", mp, swhere);
          key += " \"" + clip.annotation + "\"";
        }
        clip.audio = resolve(clip.file, key);
        if (clip.audio) setup.noise_clips.push_back(std::move(clip));
      }
      car.setups.push_back(std::move(setup));
    }
    cars.push_back(std::move(car));
  }
  return DatasetIndex(root, std::move(cars), std::move(dangling));
}

void UpdateManifestSensitivity(const std::filesystem::path& root, std::string_view car_id,
                               SetupKind setup, int channel, double offset_db) {
  const auto path = root / kManifestName;
  std::ifstream in(path);
  if (!in) throw ManifestError(ManifestError::Kind::kMissingManifest, path, "missing manifest: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ManifestError(ManifestError::Kind::kMalformed, path,
                        "malformed manifest " + path.string() + ": " + e.what());
  }
  in.close();
  if (!std::isfinite(offset_db)) throw InvalidArgument("sensitivity offset must be finite");
  bool done = false;
  for (json& jc : doc["cars"]) {
    if (jc.value("id", "") != car_id) continue;
    for (json& js : jc["setups"]) {
      if (js.value("name", "") != ToString(setup)) continue;
      json& offsets = js["sensitivity_db"];
      if (channel < 0 || channel >= static_cast<int>(offsets.size())) {
        throw InvalidArgument("no sensitivity entry for channel " + std::to_string(channel));
      }
      offsets[static_cast<std::size_t>(channel)] = offset_db;
      done = true;
    }
  }
  if (!done) {
    throw DatasetError("manifest has no setup " + std::string(ToString(setup)) + " for car \"" +
                       std::string(car_id) + "\"");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

double EstimateSensitivity(const AudioBuffer& calibration_recording, int channel,
                           double reference_dba) {
  if (!std::isfinite(reference_dba)) throw InvalidArgument("reference level must be finite");
  return reference_dba - AWeightedLevelDbfs(calibration_recording, channel);
}

}  // namespace carsynth
