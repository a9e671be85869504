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
#include <algorithm>
#include <complex>
#include <string>

#include "carsynth/dsp.h"
#include "carsynth/error.h"

namespace carsynth {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Pole frequencies of the analog A-weighting curve, Hz.
constexpr double kPole1 = 20.598997;
constexpr double kPole2 = 107.65265;
constexpr double kPole3 = 737.86223;
constexpr double kPole4 = 12194.217;

// Analog section (b2 s^2 + b1 s + b0) / (a2 s^2 + a1 s + a0) mapped through
// s = 2 fs (1 - z^-1) / (1 + z^-1).
Biquad Bilinear(double b2, double b1, double b0, double a2, double a1,
                double a0, double fs) {
  const double k = 2.0 * fs;
  const double k2 = k * k;
  const double d0 = a2 * k2 + a1 * k + a0;
  Biquad q;
  q.b0 = (b2 * k2 + b1 * k + b0) / d0;
  q.b1 = (2.0 * b0 - 2.0 * b2 * k2) / d0;
  q.b2 = (b2 * k2 - b1 * k + b0) / d0;
  q.a1 = (2.0 * a0 - 2.0 * a2 * k2) / d0;
  q.a2 = (a2 * k2 - a1 * k + a0) / d0;
  return q;
}

std::complex<double> SectionResponse(const Biquad& q, double f, double fs) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * kPi * f / fs);
  const std::complex<double> z2 = z1 * z1;
  return (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
}

double CascadeDb(const std::array<Biquad, 3>& s, double f, double fs) {
  std::complex<double> h = 1.0;
  for (const Biquad& q : s) h *= SectionResponse(q, f, fs);
  return 20.0 * std::log10(std::abs(h));
}

std::array<Biquad, 3> Design(double high_pole_hz, double fs) {
  const double w1 = 2.0 * kPi * kPole1;
  const double w2 = 2.0 * kPi * kPole2;
  const double w3 = 2.0 * kPi * kPole3;
  const double w4 = 2.0 * kPi * high_pole_hz;
  std::array<Biquad, 3> s = {
      Bilinear(1, 0, 0, 1, 2 * w1, w1 * w1, fs),
      Bilinear(1, 0, 0, 1, w2 + w3, w2 * w3, fs),
      Bilinear(0, 0, 1, 1, 2 * w4, w4 * w4, fs),
  };
  const double gain = std::pow(10.0, -CascadeDb(s, 1000.0, fs) / 20.0);
  s[0].b0 *= gain;
  s[0].b1 *= gain;
  s[0].b2 *= gain;
  return s;
}

// Analog curve in dB, 0 dB at 1 kHz.
double AnalogDb(double f) {
  auto ra = [](double x) {
    const double x2 = x * x;
    return kPole4 * kPole4 * x2 * x2 /
           ((x2 + kPole1 * kPole1) *
            std::sqrt((x2 + kPole2 * kPole2) * (x2 + kPole3 * kPole3)) *
            (x2 + kPole4 * kPole4));
  };
  return 20.0 * std::log10(ra(f) / ra(1000.0));
}

double MaxDeviationDb(double high_pole_hz, double fs) {
  const auto s = Design(high_pole_hz, fs);
  const double top = std::min(10000.0, 0.42 * fs);
  constexpr int kPoints = 48;
  double worst = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double f = 20.0 * std::pow(top / 20.0, static_cast<double>(i) / (kPoints - 1));
    worst = std::max(worst, std::abs(CascadeDb(s, f, fs) - AnalogDb(f)));
  }
  return worst;
}

double TuneHighPole(double fs) {
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = kPole4;
  double hi = 3.0 * kPole4;
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = MaxDeviationDb(x1, fs);
  double f2 = MaxDeviationDb(x2, fs);
  for (int iter = 0; iter < 60; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = MaxDeviationDb(x1, fs);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = MaxDeviationDb(x2, fs);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

AWeightingFilter::AWeightingFilter(int sample_rate) : sample_rate_(sample_rate) {
  if (sample_rate < kMinSampleRate) {
    throw InvalidArgument("A-weighting needs a sample rate of at least " +
                          std::to_string(kMinSampleRate) + " Hz, got " +
                          std::to_string(sample_rate));
  }
  high_pole_hz_ = TuneHighPole(sample_rate);
  sections_ = Design(high_pole_hz_, sample_rate);
}

double AWeightingFilter::MagnitudeDb(double frequency_hz) const {
  return CascadeDb(sections_, frequency_hz, sample_rate_);
}

std::vector<std::array<double, 2>> AWeightingFilter::Poles() const {
  std::vector<std::array<double, 2>> poles;
  for (const Biquad& q : sections_) {
    // z^2 + a1 z + a2 = 0
    const std::complex<double> disc = std::sqrt(std::complex<double>(q.a1 * q.a1 - 4.0 * q.a2));
    for (const auto& p : {(-q.a1 + disc) / 2.0, (-q.a1 - disc) / 2.0}) {
      poles.push_back({p.real(), p.imag()});
    }
  }
  return poles;
}

std::vector<double> AWeightingFilter::Apply(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& q : sections_) {
    double s1 = 0.0, s2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = q.b0 * in + s1;
      s1 = q.b1 * in - q.a1 * out + s2;
      s2 = q.b2 * in - q.a2 * out;
      v = out;
    }
  }
  return y;
}

AudioBuffer AWeight(const AudioBuffer& buf) {
  const AWeightingFilter filter(buf.sample_rate());
  AudioBuffer out(buf.channel_count(), buf.frames(), buf.sample_rate());
  for (int c = 0; c < buf.channel_count(); ++c) {
    const auto y = filter.Apply(buf.channel(c));
    std::copy(y.begin(), y.end(), out.channel(c).begin());
  }
  return out;
}

}  // namespace carsynth
