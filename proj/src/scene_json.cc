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

#include "carsynth/scene_json.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "carsynth/error.h"
#include "carsynth/wav.h"

namespace carsynth {
namespace {

using json = nlohmann::ordered_json;

template <typename T>
T Field(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("scene spec field \"") + key + "\" has the wrong type");
  }
}

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

json Level(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

SceneSpec SceneSpecFromJson(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw InvalidArgument("scene spec must be a JSON object");
  static const std::vector<std::string> kKnown = {"car", "setup", "p", "Ls", "w", "x", "La", "z", "s",
                                                  "l", "channels", "target_rate", "seed", "speech"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw InvalidArgument("unknown scene spec field \"" + key + "\"");
    }
  }
  if (!doc.contains("car")) throw InvalidArgument("scene spec needs \"car\"");
  if (!doc.contains("x")) throw InvalidArgument("scene spec needs \"x\" (dry speech file)");

  SceneSpec spec;
  spec.car = Field<std::string>(doc, "car");
  if (doc.contains("setup")) spec.setup = ParseSetupKind(Field<std::string>(doc, "setup"));
  if (doc.contains("p")) spec.position = ParseSourcePosition(Field<std::string>(doc, "p"));
  if (doc.contains("Ls")) spec.speech_effort_dba = Field<double>(doc, "Ls");
  if (doc.contains("w")) spec.window_state = Field<int>(doc, "w");
  if (doc.contains("La") && !doc["La"].is_null()) spec.audio_level_dba = Field<double>(doc, "La");
  if (doc.contains("s") && !doc["s"].is_null()) spec.speed_kmh = Field<int>(doc, "s");
  if (doc.contains("l") && !doc["l"].is_null()) spec.ventilation_level = Field<int>(doc, "l");
  if (doc.contains("channels")) spec.channels = Field<std::vector<int>>(doc, "channels");
  if (doc.contains("target_rate")) spec.target_rate = Field<int>(doc, "target_rate");
  if (doc.contains("seed")) spec.seed = Field<std::uint64_t>(doc, "seed");
  if (doc.contains("speech")) spec.speech_enabled = Field<bool>(doc, "speech");
  spec.speech = ReadWav(Resolve(base_dir, Field<std::string>(doc, "x")));
  if (doc.contains("z") && !doc["z"].is_null()) {
    spec.audio_program = ReadWav(Resolve(base_dir, Field<std::string>(doc, "z")));
  }
  return spec;
}

json SceneSidecar(const json& spec, const SceneResult& r) {
  json out;
  out["spec"] = spec;
  out["sample_rate"] = r.mixture.sample_rate();
  out["frames"] = r.mixture.frames();
  out["channels"] = r.channels;
  out["gains"] = {{"speech_normalization", r.speech_gains.normalization},
                  {"speech_effort", r.speech_gains.effort},
                  {"speech_active_level_dbfs", r.speech_gains.active_level_dbfs},
                  {"audio_program", r.audio_gain}};
  out["reference_channel"] = r.reference_channel ? json(*r.reference_channel) : json(nullptr);
  out["levels_dba"] = {{"S", Level(r.levels_dba.speech)},
                       {"A", Level(r.levels_dba.audio)},
                       {"N", Level(r.levels_dba.noise)},
                       {"V", Level(r.levels_dba.ventilation)},
                       {"Y", Level(r.levels_dba.mixture)}};
  out["peak"] = r.peak;
  out["peak_dbfs"] = r.peak > 0 ? json(20.0 * std::log10(r.peak)) : json(nullptr);
  out["warnings"] = r.warnings;
  return out;
}

}  // namespace carsynth
