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

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>

#include "carsynth/dsp.h"
#include "carsynth/error.h"

namespace carsynth {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per size under a lock and kept for the
// process lifetime.
struct RealFftPlans {
  fftw_plan forward;
  fftw_plan inverse;
};

const RealFftPlans& PlansFor(int size) {
  static std::mutex mu;
  static std::map<int, RealFftPlans> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(size);
  if (it != cache.end()) return it->second;
  double* real = fftw_alloc_real(size);
  fftw_complex* spec = fftw_alloc_complex(size / 2 + 1);
  RealFftPlans plans{
      fftw_plan_dft_r2c_1d(size, real, spec, FFTW_ESTIMATE),
      fftw_plan_dft_c2r_1d(size, spec, real, FFTW_ESTIMATE)};
  fftw_free(real);
  fftw_free(spec);
  return cache.emplace(size, plans).first->second;
}

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};
using RealBlock = std::unique_ptr<double[], FftwDeleter<double>>;
using SpectrumBlock = std::unique_ptr<fftw_complex[], FftwDeleter<fftw_complex>>;

RealBlock AllocReal(int n) { return RealBlock(fftw_alloc_real(n)); }
SpectrumBlock AllocSpectrum(int n) { return SpectrumBlock(fftw_alloc_complex(n)); }

int NextPow2(std::size_t n) {
  int p = 1;
  while (static_cast<std::size_t>(p) < n) p <<= 1;
  return p;
}

}  // namespace

std::vector<double> ConvolveDirect(std::span<const double> x,
                                   std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    for (std::size_t k = 0; k < h.size(); ++k) y[n + k] += x[n] * h[k];
  }
  return y;
}

AudioBuffer Convolve(const AudioBuffer& signal, const AudioBuffer& ir) {
  if (signal.channel_count() != 1) {
    throw InvalidArgument("convolution signal must be mono");
  }
  if (signal.sample_rate() != ir.sample_rate()) throw InvalidArgument("rate mismatch");
  if (ir.empty()) throw InvalidArgument("empty impulse response");

  const std::size_t n = signal.frames();
  const int channels = ir.channel_count();
  AudioBuffer out(channels, n, signal.sample_rate());
  if (n == 0) return out;

  // Kernel longer than the signal contributes nothing past the truncation.
  const std::size_t k = std::min(ir.frames(), n);
  const int fft_size = std::max(64, NextPow2(2 * k));
  const std::size_t hop = static_cast<std::size_t>(fft_size) - k + 1;
  const int bins = fft_size / 2 + 1;
  const RealFftPlans& plans = PlansFor(fft_size);
  const double inv_size = 1.0 / fft_size;

  RealBlock time = AllocReal(fft_size);
  std::vector<SpectrumBlock> kernels;
  kernels.reserve(channels);
  for (int c = 0; c < channels; ++c) {
    auto h = ir.channel(c);
    std::fill(time.get(), time.get() + fft_size, 0.0);
    std::copy(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(k), time.get());
    kernels.push_back(AllocSpectrum(bins));
    fftw_execute_dft_r2c(plans.forward, time.get(), kernels.back().get());
  }

  SpectrumBlock block_spec = AllocSpectrum(bins);
  SpectrumBlock product = AllocSpectrum(bins);
  const auto x = signal.channel(0);
  for (std::size_t start = 0; start < n; start += hop) {
    const std::size_t len = std::min(hop, n - start);
    std::fill(time.get(), time.get() + fft_size, 0.0);
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(start),
              x.begin() + static_cast<std::ptrdiff_t>(start + len), time.get());
    fftw_execute_dft_r2c(plans.forward, time.get(), block_spec.get());
    const std::size_t valid = std::min<std::size_t>(len + k - 1, n - start);
    for (int c = 0; c < channels; ++c) {
      const fftw_complex* h = kernels[c].get();
      for (int b = 0; b < bins; ++b) {
        const double re = block_spec[b][0] * h[b][0] - block_spec[b][1] * h[b][1];
        const double im = block_spec[b][0] * h[b][1] + block_spec[b][1] * h[b][0];
        product[b][0] = re;
        product[b][1] = im;
      }
      fftw_execute_dft_c2r(plans.inverse, product.get(), time.get());
      auto dst = out.channel(c);
      for (std::size_t i = 0; i < valid; ++i) dst[start + i] += time[i] * inv_size;
    }
  }
  return out;
}

}  // namespace carsynth
