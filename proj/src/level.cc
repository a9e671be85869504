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
#include <string>

#include "carsynth/dsp.h"
#include "carsynth/error.h"

namespace carsynth {

double Rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  long double acc = 0.0L;
  for (double v : x) acc += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(acc / x.size()));
}

double AWeightedLevelDbfs(const AudioBuffer& buf, int channel) {
  const AWeightingFilter filter(buf.sample_rate());
  const double rms = Rms(filter.Apply(buf.channel(channel)));
  if (!(rms > 0.0)) throw InvalidArgument("silent signal");
  return 20.0 * std::log10(rms);
}

SensitivityMap::SensitivityMap(std::vector<double> offsets_db)
    : offsets_(std::move(offsets_db)) {
  for (double v : offsets_) {
    if (!std::isfinite(v)) throw InvalidArgument("sensitivity offset must be finite");
  }
}

double SensitivityMap::offset(int channel) const {
  if (channel < 0 || static_cast<std::size_t>(channel) >= offsets_.size()) {
    throw InvalidArgument("no sensitivity entry for channel " + std::to_string(channel));
  }
  return offsets_[static_cast<std::size_t>(channel)];
}

void SensitivityMap::set_offset(int channel, double offset_db) {
  if (channel < 0 || static_cast<std::size_t>(channel) >= offsets_.size()) {
    throw InvalidArgument("no sensitivity entry for channel " + std::to_string(channel));
  }
  if (!std::isfinite(offset_db)) throw InvalidArgument("sensitivity offset must be finite");
  offsets_[static_cast<std::size_t>(channel)] = offset_db;
}

double EquivalentLevel(const AudioBuffer& buf, const SensitivityMap& sensitivity,
                       int channel) {
  const double offset = sensitivity.offset(channel);
  return AWeightedLevelDbfs(buf, channel) + offset;
}

}  // namespace carsynth
