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

#ifndef CARSYNTH_METRICS_H_
#define CARSYNTH_METRICS_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "carsynth/dataset.h"
#include "json.hpp"

namespace carsynth {

// A stationary noise condition: driving at `speed_kmh` with ventilation off,
// or parked (speed 0) with ventilation at `ventilation_level`.
struct ConditionKey {
  int speed_kmh = 0;
  int window_state = 0;
  std::optional<int> ventilation_level;

  friend bool operator==(const ConditionKey&, const ConditionKey&) = default;
};

// Parses "speed=70,w=0" or "vent=2,w=0" (also "l=", "s=", "window=").
ConditionKey ParseConditionKey(const std::string& text);
std::string ToString(const ConditionKey& key);

struct ConditionMetrics {
  ConditionKey key;
  bool available = false;  // false reproduces an "N/A" table cell
  double noise_dba = 0.0;
  double snr_db = 0.0;     // speech_dba - noise_dba, exact
  double speech_dba = 0.0;
  int channel = 0;
};

// Reported levels are rounded to multiples of 2^-32 dB. Differences of such
// values below 2^20 dB are exact in double precision, which keeps
// snr + noise == speech bit-exact in every row.
double QuantizeLevel(double db);

// Equivalent level of the full condition clip on `channel` at its native
// rate. channel < 0 selects the setup's reference channel.
double NoiseLevel(const DatasetIndex& index, const std::string& car, SetupKind setup,
                  const ConditionKey& condition, int channel = -1);

// Level at `channel` of a calibrated probe (seeded pink noise normalized to
// the source reference) rendered through the (p, w) impulse response at
// effort Ls.
double SpeechLevel(const DatasetIndex& index, const std::string& car, SetupKind setup,
                   SourcePosition p, double speech_effort_dba, int window_state, int channel = -1);

double Snr(const DatasetIndex& index, const std::string& car, SetupKind setup,
           const ConditionKey& condition, SourcePosition p, double speech_effort_dba,
           int channel = -1);

ConditionMetrics MeasureCondition(const DatasetIndex& index, const std::string& car,
                                  SetupKind setup, const ConditionKey& condition,
                                  SourcePosition p, double speech_effort_dba, int channel = -1);

// One row per declared (speed, w) and (ventilation level, w) combination,
// speeds first. Missing noise or impulse responses give unavailable rows.
std::vector<ConditionMetrics> ConditionTable(const DatasetIndex& index, const std::string& car,
                                             SetupKind setup, SourcePosition p,
                                             double speech_effort_dba, int channel = -1);

// Columns: speed,w,ventilation,noise_dba,snr_db,speech_dba,channel.
// Numbers use 17 significant digits; unavailable cells read "N/A".
void WriteMetricsCsv(std::ostream& out, const std::vector<ConditionMetrics>& rows);
nlohmann::ordered_json MetricsJson(const std::vector<ConditionMetrics>& rows);

}  // namespace carsynth

#endif  // CARSYNTH_METRICS_H_
