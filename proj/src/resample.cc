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
#include <cstdint>
#include <numeric>

#include "carsynth/dsp.h"
#include "carsynth/error.h"

namespace carsynth {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kPassbandFraction = 0.45;
constexpr double kStopbandDb = 80.0;
// Above this many polyphase branches the kernel is evaluated per output
// sample instead of being tabulated.
constexpr std::int64_t kMaxTabulatedPhases = 4096;

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

class SincKernel {
 public:
  SincKernel(double cutoff, int half_width, double beta)
      : cutoff_(cutoff), half_width_(half_width), beta_(beta),
        norm_(1.0 / std::cyl_bessel_i(0.0, beta)) {}

  double operator()(double t) const {
    const double r = t / half_width_;
    if (std::abs(r) >= 1.0) return 0.0;
    const double window =
        std::cyl_bessel_i(0.0, beta_ * std::sqrt(1.0 - r * r)) * norm_;
    return 2.0 * cutoff_ * Sinc(2.0 * cutoff_ * t) * window;
  }

  int half_width() const { return half_width_; }

 private:
  double cutoff_;
  int half_width_;
  double beta_;
  double norm_;
};

// Taps for fractional position `frac` in [0, 1): weights for input samples
// base - half_width + 1 .. base + half_width, normalized to unit sum.
std::vector<double> PhaseTaps(const SincKernel& kernel, double frac) {
  const int w = kernel.half_width();
  std::vector<double> taps(2 * w);
  for (int j = 0; j < 2 * w; ++j) {
    const int offset = j - w + 1;
    taps[j] = kernel(frac - offset);
  }
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  if (sum != 0.0) {
    for (double& t : taps) t /= sum;
  }
  return taps;
}

}  // namespace

std::size_t ResampledLength(std::size_t frames, int source_rate, int target_rate) {
  if (source_rate <= 0 || target_rate <= 0) throw InvalidArgument("sample rates must be > 0");
  const unsigned __int128 num =
      static_cast<unsigned __int128>(frames) * static_cast<unsigned>(target_rate) * 2 +
      static_cast<unsigned>(source_rate);
  return static_cast<std::size_t>(num / (2u * static_cast<unsigned>(source_rate)));
}

AudioBuffer Resample(const AudioBuffer& buf, int target_rate) {
  if (target_rate <= 0) throw InvalidArgument("target_rate must be > 0");
  if (buf.channel_count() < 1 || buf.empty()) throw InvalidArgument("empty input");
  const int source_rate = buf.sample_rate();
  if (source_rate == target_rate) return buf;

  const std::int64_t g = std::gcd<std::int64_t>(source_rate, target_rate);
  const std::int64_t up = target_rate / g;    // L
  const std::int64_t down = source_rate / g;  // M
  const std::int64_t in_len = static_cast<std::int64_t>(buf.frames());
  const std::int64_t out_len =
      static_cast<std::int64_t>(ResampledLength(buf.frames(), source_rate, target_rate));

  const double min_rate = std::min(source_rate, target_rate);
  const double cutoff = kPassbandFraction * min_rate / source_rate;
  const double transition = (0.5 - kPassbandFraction) * min_rate / source_rate;
  const double taps = (kStopbandDb - 7.95) / (14.36 * transition);
  const int half_width = static_cast<int>(std::ceil(taps / 2.0));
  const double beta = 0.1102 * (kStopbandDb - 8.7);
  const SincKernel kernel(cutoff, half_width, beta);

  std::vector<std::vector<double>> table;
  const bool tabulate = up <= kMaxTabulatedPhases;
  if (tabulate) {
    table.reserve(static_cast<std::size_t>(up));
    for (std::int64_t p = 0; p < up; ++p) {
      table.push_back(PhaseTaps(kernel, static_cast<double>(p) / up));
    }
  }

  AudioBuffer out(buf.channel_count(), static_cast<std::size_t>(out_len), target_rate);
  std::vector<double> scratch;
  for (std::int64_t n = 0; n < out_len; ++n) {
    const std::int64_t num = n * down;
    const std::int64_t base = num / up;
    const std::int64_t phase = num % up;
    const std::vector<double>* taps_ptr;
    if (tabulate) {
      taps_ptr = &table[static_cast<std::size_t>(phase)];
    } else {
      scratch = PhaseTaps(kernel, static_cast<double>(phase) / up);
      taps_ptr = &scratch;
    }
    const auto& tap = *taps_ptr;
    const std::int64_t first = base - half_width + 1;
    const std::int64_t lo = std::max<std::int64_t>(0, -first);
    const std::int64_t hi = std::min<std::int64_t>(2 * half_width, in_len - first);
    for (int c = 0; c < buf.channel_count(); ++c) {
      const auto src = buf.channel(c);
      double acc = 0.0;
      for (std::int64_t j = lo; j < hi; ++j) acc += tap[j] * src[first + j];
      out.channel(c)[n] = acc;
    }
  }
  return out;
}

AudioBuffer Downmix(const AudioBuffer& buf) {
  if (buf.channel_count() < 1) throw InvalidArgument("empty input");
  if (buf.channel_count() == 1) return buf;
  AudioBuffer out(1, buf.frames(), buf.sample_rate());
  auto dst = out.channel(0);
  const double inv = 1.0 / buf.channel_count();
  for (std::size_t n = 0; n < buf.frames(); ++n) {
    double acc = 0.0;
    for (int c = 0; c < buf.channel_count(); ++c) acc += buf.channel(c)[n];
    dst[n] = acc * inv;
  }
  return out;
}

}  // namespace carsynth
