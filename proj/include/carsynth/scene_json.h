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

#ifndef CARSYNTH_SCENE_JSON_H_
#define CARSYNTH_SCENE_JSON_H_

#include <filesystem>
#include <string>

#include "carsynth/scene.h"
#include "json.hpp"

namespace carsynth {

// Scene spec documents use the symbol names of the synthesis model:
//   {"car": "fixture", "setup": "array", "p": "driver", "Ls": 60, "w": 1,
//    "x": "speech.wav", "La": 55, "z": "music.wav", "s": 70, "l": 2,
//    "channels": [0, 3], "target_rate": 16000, "seed": 7, "speech": true}
// Only "car" and "x" are required. Relative paths resolve against base_dir.
SceneSpec SceneSpecFromJson(const nlohmann::ordered_json& doc,
                            const std::filesystem::path& base_dir);
nlohmann::ordered_json ReadJsonFile(const std::filesystem::path& path);

// Applied gains, component levels and warnings of a synthesized scene; `spec`
// is echoed verbatim under "spec".
nlohmann::ordered_json SceneSidecar(const nlohmann::ordered_json& spec,
                                    const SceneResult& result);

}  // namespace carsynth

#endif  // CARSYNTH_SCENE_JSON_H_
