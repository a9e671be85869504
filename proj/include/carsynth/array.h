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

#ifndef CARSYNTH_ARRAY_H_
#define CARSYNTH_ARRAY_H_

#include <array>
#include <complex>
#include <filesystem>
#include <vector>

namespace carsynth {

struct Setup;

// Microphone coordinates in meters. Steering assumes a far-field plane wave
// travelling in the horizontal (x, y) plane; z is ignored.
struct ArrayGeometry {
  std::vector<std::array<double, 3>> positions;
  double speed_of_sound = 343.0;

  // `mics` microphones evenly spaced on a horizontal circle around the
  // origin, mic 0 at azimuth `first_azimuth` (radians, 0 = +x).
  static ArrayGeometry Circular(int mics = 8, double radius = 0.05, double first_azimuth = 0.0,
                                double speed_of_sound = 343.0);

  int size() const { return static_cast<int>(positions.size()); }
  std::array<double, 3> Centroid() const;
  // Horizontal distance and azimuth of mic m relative to the centroid.
  double Radius(int m) const;
  double Azimuth(int m) const;

  // Throws InvalidArgument unless the geometry has at least one mic and a
  // positive speed of sound.
  void Check() const;
  // True when all mics share the centroid distance and adjacent mics are
  // 2*pi/size apart, within `tolerance` (meters / radians).
  bool IsUniformCircular(double tolerance = 1e-9) const;
};

// Geometry stored in a dataset setup; throws DatasetError if absent.
ArrayGeometry GeometryOf(const Setup& setup);

// entries[(f * azimuths + d) * mics + m] = exp(+j 2 pi f (p_m . u_d) / c),
// with p_m relative to the centroid and u_d the unit vector toward azimuth
// d. Mics nearer the source lead in phase.
struct SteeringMatrix {
  std::vector<double> frequencies_hz;
  std::vector<double> azimuths_rad;
  int mics = 0;
  std::vector<std::complex<double>> entries;

  const std::complex<double>& at(std::size_t f, std::size_t d, std::size_t m) const {
    return entries[(f * azimuths_rad.size() + d) * static_cast<std::size_t>(mics) + m];
  }
};

SteeringMatrix SteeringVectors(const ArrayGeometry& geom, const std::vector<double>& frequencies_hz,
                               const std::vector<double>& azimuths_rad);

// Arrival time of a plane wave from `azimuth_rad` at each mic relative to
// the centroid: -(p_m . u) / c seconds. The steering phase equals
// -2 pi f * delay.
std::vector<double> PairwiseDelays(const ArrayGeometry& geom, double azimuth_rad);

// Binary export: the 8 bytes "CSTEERv1", a little-endian uint32 header
// length, a JSON header {"shape": [F, D, M], "dtype": "complex128",
// "order": "C", "axes": {...}} padded with spaces so the payload starts on a
// 16-byte boundary, then F*D*M (re, im) little-endian float64 pairs.
void WriteSteeringMatrix(const std::filesystem::path& path, const SteeringMatrix& m);
SteeringMatrix ReadSteeringMatrix(const std::filesystem::path& path);

}  // namespace carsynth

#endif  // CARSYNTH_ARRAY_H_
