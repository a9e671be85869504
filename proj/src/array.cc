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

#include "carsynth/array.h"

#include <cmath>
#include <cstring>
#include <string>

#include "carsynth/dataset.h"
#include "carsynth/error.h"
#include "carsynth/wav.h"
#include "json.hpp"

namespace carsynth {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr char kMagic[9] = "CSTEERv1";

// Projection of mic m (relative to the centroid) on the arrival direction.
std::vector<double> Projections(const ArrayGeometry& geom, double azimuth) {
  const auto c = geom.Centroid();
  const double ux = std::cos(azimuth);
  const double uy = std::sin(azimuth);
  std::vector<double> proj(static_cast<std::size_t>(geom.size()));
  for (int m = 0; m < geom.size(); ++m) {
    const auto& p = geom.positions[static_cast<std::size_t>(m)];
    proj[static_cast<std::size_t>(m)] = (p[0] - c[0]) * ux + (p[1] - c[1]) * uy;
  }
  return proj;
}

void PutLe64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

double GetLe64(const std::uint8_t* p) {
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

ArrayGeometry ArrayGeometry::Circular(int mics, double radius, double first_azimuth,
                                      double speed_of_sound) {
  if (mics < 1 || !(radius > 0)) throw InvalidArgument("circular array needs mics >= 1 and radius > 0");
  ArrayGeometry g;
  g.speed_of_sound = speed_of_sound;
  for (int m = 0; m < mics; ++m) {
    const double phi = first_azimuth + 2.0 * kPi * m / mics;
    g.positions.push_back({radius * std::cos(phi), radius * std::sin(phi), 0.0});
  }
  g.Check();
  return g;
}

std::array<double, 3> ArrayGeometry::Centroid() const {
  std::array<double, 3> c{0, 0, 0};
  for (const auto& p : positions) {
    for (int i = 0; i < 3; ++i) c[i] += p[i];
  }
  for (double& v : c) v /= static_cast<double>(positions.size());
  return c;
}

double ArrayGeometry::Radius(int m) const {
  const auto c = Centroid();
  const auto& p = positions.at(static_cast<std::size_t>(m));
  return std::hypot(p[0] - c[0], p[1] - c[1]);
}

double ArrayGeometry::Azimuth(int m) const {
  const auto c = Centroid();
  const auto& p = positions.at(static_cast<std::size_t>(m));
  return std::atan2(p[1] - c[1], p[0] - c[0]);
}

void ArrayGeometry::Check() const {
  if (positions.empty()) throw InvalidArgument("array geometry has no microphones");
  if (!(speed_of_sound > 0) || !std::isfinite(speed_of_sound)) {
    throw InvalidArgument("speed of sound must be > 0");
  }
  for (const auto& p : positions) {
    for (double v : p) {
      if (!std::isfinite(v)) throw InvalidArgument("non-finite microphone coordinate");
    }
  }
}

bool ArrayGeometry::IsUniformCircular(double tolerance) const {
  if (size() < 2) return false;
  const double r0 = Radius(0);
  const double step = 2.0 * kPi / size();
  for (int m = 0; m < size(); ++m) {
    if (std::abs(Radius(m) - r0) > tolerance) return false;
    double gap = Azimuth((m + 1) % size()) - Azimuth(m);
    gap = std::remainder(gap, 2.0 * kPi);
    if (gap < 0) gap += 2.0 * kPi;
    if (std::abs(gap - step) > tolerance) return false;
  }
  return true;
}

ArrayGeometry GeometryOf(const Setup& setup) {
  if (!setup.mic_positions) {
    throw DatasetError(std::string(ToString(setup.kind)) + " setup has no microphone geometry");
  }
  ArrayGeometry g;
  g.positions = *setup.mic_positions;
  g.speed_of_sound = setup.speed_of_sound;
  g.Check();
  return g;
}

SteeringMatrix SteeringVectors(const ArrayGeometry& geom, const std::vector<double>& frequencies_hz,
                               const std::vector<double>& azimuths_rad) {
  geom.Check();
  for (double f : frequencies_hz) {
    if (!(f > 0) || !std::isfinite(f)) {
      throw InvalidArgument("steering frequencies must be > 0 (got " + std::to_string(f) + ")");
    }
  }
  SteeringMatrix out;
  out.frequencies_hz = frequencies_hz;
  out.azimuths_rad = azimuths_rad;
  out.mics = geom.size();
  out.entries.reserve(frequencies_hz.size() * azimuths_rad.size() * static_cast<std::size_t>(geom.size()));
  std::vector<std::vector<double>> proj;
  for (double az : azimuths_rad) proj.push_back(Projections(geom, az));
  for (double f : frequencies_hz) {
    const double k = 2.0 * kPi * f / geom.speed_of_sound;
    for (std::size_t d = 0; d < azimuths_rad.size(); ++d) {
      for (double x : proj[d]) out.entries.push_back(std::polar(1.0, k * x));
    }
  }
  return out;
}

std::vector<double> PairwiseDelays(const ArrayGeometry& geom, double azimuth_rad) {
  geom.Check();
  auto delays = Projections(geom, azimuth_rad);
  for (double& d : delays) d = -d / geom.speed_of_sound;
  return delays;
}

void WriteSteeringMatrix(const std::filesystem::path& path, const SteeringMatrix& m) {
  nlohmann::ordered_json header = {
      {"shape", {m.frequencies_hz.size(), m.azimuths_rad.size(), m.mics}},
      {"dtype", "complex128"},
      {"order", "C"},
      {"axes", {{"frequency_hz", m.frequencies_hz}, {"azimuth_rad", m.azimuths_rad}, {"mic", m.mics}}}};
  std::string text = header.dump();
  while ((8 + 4 + text.size()) % 16 != 0) text.push_back(' ');

  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& e : m.entries) {
    PutLe64(out, e.real());
    PutLe64(out, e.imag());
  }
  WriteFileBytes(path, out);
}

SteeringMatrix ReadSteeringMatrix(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw IoError(path.string() + ": not a steering matrix file");
  }
  const std::uint32_t len = bytes[8] | (bytes[9] << 8) | (bytes[10] << 16) |
                            (static_cast<std::uint32_t>(bytes[11]) << 24);
  if (12 + static_cast<std::size_t>(len) > bytes.size()) throw IoError(path.string() + ": truncated header");
  SteeringMatrix m;
  std::size_t count = 0;
  try {
    const auto header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + len);
    m.frequencies_hz = header.at("axes").at("frequency_hz").get<std::vector<double>>();
    m.azimuths_rad = header.at("axes").at("azimuth_rad").get<std::vector<double>>();
    m.mics = header.at("axes").at("mic").get<int>();
    const auto shape = header.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 3 || shape[0] != m.frequencies_hz.size() || shape[1] != m.azimuths_rad.size() ||
        shape[2] != static_cast<std::size_t>(m.mics)) {
      throw IoError("shape does not match axes");
    }
    count = shape[0] * shape[1] * shape[2];
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad header: " + e.what());
  }
  const std::size_t payload = 12 + len;
  if (bytes.size() != payload + count * 16) throw IoError(path.string() + ": payload size mismatch");
  m.entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* p = bytes.data() + payload + i * 16;
    m.entries.emplace_back(GetLe64(p), GetLe64(p + 8));
  }
  return m;
}

}  // namespace carsynth
