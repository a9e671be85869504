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

#include "carsynth/metrics.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "carsynth/dsp.h"
#include "carsynth/random.h"
#include "carsynth/scene.h"

namespace carsynth {
namespace {

constexpr double kProbeSeconds = 10.0;
constexpr std::uint64_t kProbeSeed = 0x5EEDC0DEull;

int ResolveChannel(const Setup& setup, int channel) {
  const int c = channel < 0 ? setup.reference_channel : channel;
  if (c >= setup.channel_count) {
    throw InvalidArgument("channel " + std::to_string(c) + " outside 0.." +
                          std::to_string(setup.channel_count - 1));
  }
  return c;
}

const NoiseClip& ConditionClip(const Setup& setup, const ConditionKey& key) {
  const NoiseClip* clip = key.ventilation_level
                              ? setup.FindVentilation(*key.ventilation_level, key.window_state)
                              : setup.FindDriving(key.speed_kmh, key.window_state);
  if (!clip) throw DatasetError("no noise recording for condition " + ToString(key));
  return *clip;
}

AudioBuffer Probe(int rate) {
  Rng rng(kProbeSeed);
  PinkFilter pink;
  const std::size_t warmup = static_cast<std::size_t>(rate);
  const std::size_t n = static_cast<std::size_t>(kProbeSeconds * rate);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < warmup + n; ++i) {
    const double v = pink(rng.Gaussian());
    if (i >= warmup) x[i - warmup] = v;
  }
  return AudioBuffer::Mono(std::move(x), rate);
}

std::string Number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ConditionKey ParseConditionKey(const std::string& text) {
  ConditionKey key;
  bool have_w = false;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("condition item \"" + item + "\" lacks '='");
    const std::string name = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    const bool is_vent = name == "vent" || name == "l" || name == "ventilation";
    if (is_vent && value == "off") {
      key.ventilation_level.reset();
      continue;
    }
    int v;
    try {
      std::size_t used = 0;
      v = std::stoi(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw InvalidArgument("condition value \"" + value + "\" is not an integer");
    }
    if (name == "speed" || name == "s") {
      key.speed_kmh = v;
    } else if (name == "w" || name == "window") {
      key.window_state = v;
      have_w = true;
    } else if (is_vent) {
      key.ventilation_level = v;
    } else {
      throw InvalidArgument("unknown condition item \"" + name + "\"");
    }
  }
  if (!have_w) throw InvalidArgument("condition needs w=<window state>");
  if (key.ventilation_level && key.speed_kmh != 0) {
    throw InvalidArgument("ventilation conditions are recorded at speed 0");
  }
  return key;
}

std::string ToString(const ConditionKey& key) {
  std::string s = "speed=" + std::to_string(key.speed_kmh) + ",w=" + std::to_string(key.window_state);
  s += key.ventilation_level ? ",vent=" + std::to_string(*key.ventilation_level) : ",vent=off";
  return s;
}

double QuantizeLevel(double db) { return std::ldexp(std::nearbyint(std::ldexp(db, 32)), -32); }

double NoiseLevel(const DatasetIndex& index, const std::string& car, SetupKind setup_kind,
                  const ConditionKey& condition, int channel) {
  const Setup& setup = index.setup(car, setup_kind);
  const int c = ResolveChannel(setup, channel);
  return QuantizeLevel(EquivalentLevel(ConditionClip(setup, condition).clip(), setup.sensitivity, c));
}

double SpeechLevel(const DatasetIndex& index, const std::string& car, SetupKind setup_kind,
                   SourcePosition p, double speech_effort_dba, int window_state, int channel) {
  const Setup& setup = index.setup(car, setup_kind);
  const int c = ResolveChannel(setup, channel);
  const ImpulseResponseSet* ir = setup.FindImpulseResponse(p, window_state);
  if (!ir) {
    throw DatasetError("no impulse response for p=" + std::string(ToString(p)) +
                       ", w=" + std::to_string(window_state));
  }
  SceneSpec spec;
  spec.car = car;
  spec.setup = setup_kind;
  spec.position = p;
  spec.speech_effort_dba = speech_effort_dba;
  spec.window_state = window_state;
  spec.target_rate = ir->ir().sample_rate();
  spec.speech = Probe(spec.target_rate);
  spec.channels = {c};
  const AudioBuffer s = BuildSpeech(index, spec);
  SensitivityMap single({setup.sensitivity.offset(c)});
  return QuantizeLevel(EquivalentLevel(s, single, 0));
}

double Snr(const DatasetIndex& index, const std::string& car, SetupKind setup,
           const ConditionKey& condition, SourcePosition p, double speech_effort_dba, int channel) {
  return SpeechLevel(index, car, setup, p, speech_effort_dba, condition.window_state, channel) -
         NoiseLevel(index, car, setup, condition, channel);
}

ConditionMetrics MeasureCondition(const DatasetIndex& index, const std::string& car,
                                  SetupKind setup, const ConditionKey& condition,
                                  SourcePosition p, double speech_effort_dba, int channel) {
  ConditionMetrics row;
  row.key = condition;
  row.channel = ResolveChannel(index.setup(car, setup), channel);
  row.noise_dba = NoiseLevel(index, car, setup, condition, row.channel);
  row.speech_dba = SpeechLevel(index, car, setup, p, speech_effort_dba, condition.window_state, row.channel);
  row.snr_db = row.speech_dba - row.noise_dba;
  row.available = true;
  return row;
}

std::vector<ConditionMetrics> ConditionTable(const DatasetIndex& index, const std::string& car,
                                             SetupKind setup_kind, SourcePosition p,
                                             double speech_effort_dba, int channel) {
  const Setup& setup = index.setup(car, setup_kind);
  const int c = ResolveChannel(setup, channel);
  std::vector<ConditionKey> keys;
  for (int s : setup.speed_grid_kmh) {
    for (int w : setup.window_states) keys.push_back({s, w, std::nullopt});
  }
  for (int l : setup.ventilation_levels) {
    for (int w : setup.window_states) keys.push_back({0, w, l});
  }

  std::map<int, std::optional<double>> speech_by_window;
  std::vector<ConditionMetrics> rows;
  for (const ConditionKey& key : keys) {
    ConditionMetrics row;
    row.key = key;
    row.channel = c;
    const NoiseClip* clip = key.ventilation_level
                                ? setup.FindVentilation(*key.ventilation_level, key.window_state)
                                : setup.FindDriving(key.speed_kmh, key.window_state);
    if (!speech_by_window.count(key.window_state)) {
      speech_by_window[key.window_state] =
          setup.FindImpulseResponse(p, key.window_state)
              ? std::optional(SpeechLevel(index, car, setup_kind, p, speech_effort_dba, key.window_state, c))
              : std::nullopt;
    }
    const auto& speech = speech_by_window[key.window_state];
    if (clip && speech) {
      row.noise_dba = QuantizeLevel(EquivalentLevel(clip->clip(), setup.sensitivity, c));
      row.speech_dba = *speech;
      row.snr_db = row.speech_dba - row.noise_dba;
      row.available = true;
    }
    rows.push_back(row);
  }
  return rows;
}

void WriteMetricsCsv(std::ostream& out, const std::vector<ConditionMetrics>& rows) {
  out << "speed,w,ventilation,noise_dba,snr_db,speech_dba,channel\n";
  for (const auto& r : rows) {
    out << r.key.speed_kmh << "," << r.key.window_state << ","
        << (r.key.ventilation_level ? std::to_string(*r.key.ventilation_level) : "off") << ",";
    if (r.available) {
      out << Number(r.noise_dba) << "," << Number(r.snr_db) << "," << Number(r.speech_dba);
    } else {
      out << "N/A,N/A,N/A";
    }
    out << "," << r.channel << "\n";
  }
}

nlohmann::ordered_json MetricsJson(const std::vector<ConditionMetrics>& rows) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["speed"] = r.key.speed_kmh;
    j["w"] = r.key.window_state;
    j["ventilation"] = r.key.ventilation_level ? nlohmann::ordered_json(*r.key.ventilation_level)
                                               : nlohmann::ordered_json("off");
    j["noise_dba"] = r.available ? nlohmann::ordered_json(r.noise_dba) : nullptr;
    j["snr_db"] = r.available ? nlohmann::ordered_json(r.snr_db) : nullptr;
    j["speech_dba"] = r.available ? nlohmann::ordered_json(r.speech_dba) : nullptr;
    j["channel"] = r.channel;
    out.push_back(j);
  }
  return out;
}

}  // namespace carsynth
