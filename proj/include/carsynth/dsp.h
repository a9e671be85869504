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

#ifndef CARSYNTH_DSP_H_
#define CARSYNTH_DSP_H_

#include <array>
#include <span>
#include <vector>

#include "carsynth/audio_buffer.h"

namespace carsynth {

// Band-limited rate conversion with a Kaiser-windowed sinc kernel evaluated
// on the rational grid target/source. The passband edge sits at
// 0.45 * min(source, target) and the stopband begins at 0.5 * min(...)
// with at least 80 dB design attenuation. Output length is
// round(frames * target / source). Equal rates return an exact copy.
AudioBuffer Resample(const AudioBuffer& buf, int target_rate);
// round(frames * target_rate / source_rate), halves rounded up.
std::size_t ResampledLength(std::size_t frames, int source_rate, int target_rate);

// Mean over channels.
AudioBuffer Downmix(const AudioBuffer& buf);

// Convolves a mono signal with every channel of `ir` and keeps the first
// signal.frames() samples of each result. FFT overlap-add.
AudioBuffer Convolve(const AudioBuffer& signal, const AudioBuffer& ir);

// Direct O(N*K) linear convolution of two sequences, full length.
std::vector<double> ConvolveDirect(std::span<const double> x,
                                   std::span<const double> h);

// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Digital A-weighting filter: three bilinear-transformed second-order
// sections of the analog A-weighting transfer function, gain normalized to
// 0 dB at 1 kHz.
//
// The bilinear transform compresses the response near Nyquist, which pulls
// the 8 kHz region of a 48 kHz design about half a decibel low. To absorb
// that, the analog frequency of the double 12194 Hz pole is tuned at
// construction (golden-section minimax over 20 Hz .. min(10 kHz, 0.42 fs))
// before discretization. The remaining poles are used as-is.
class AWeightingFilter {
 public:
  static constexpr int kMinSampleRate = 8000;

  explicit AWeightingFilter(int sample_rate);

  int sample_rate() const { return sample_rate_; }
  const std::array<Biquad, 3>& sections() const { return sections_; }
  double tuned_high_pole_hz() const { return high_pole_hz_; }

  // Magnitude response of the digital filter in dB.
  double MagnitudeDb(double frequency_hz) const;
  // Poles of all sections as (re, im) pairs; used by stability checks.
  std::vector<std::array<double, 2>> Poles() const;

  std::vector<double> Apply(std::span<const double> x) const;

 private:
  int sample_rate_;
  double high_pole_hz_;
  std::array<Biquad, 3> sections_;
};

// Every channel filtered by AWeightingFilter(buf.sample_rate()).
AudioBuffer AWeight(const AudioBuffer& buf);

// Root mean square of a sequence; 0 for an empty one.
double Rms(std::span<const double> x);

// 20 log10 of the A-weighted RMS of one channel, dB re full scale.
// Throws InvalidArgument("silent signal") when the RMS is zero.
double AWeightedLevelDbfs(const AudioBuffer& buf, int channel);

// Kellet's filter bank turning white noise into an approximately -3 dB/octave
// spectrum.
class PinkFilter {
 public:
  double operator()(double white) {
    b_[0] = 0.99886 * b_[0] + white * 0.0555179;
    b_[1] = 0.99332 * b_[1] + white * 0.0750759;
    b_[2] = 0.96900 * b_[2] + white * 0.1538520;
    b_[3] = 0.86650 * b_[3] + white * 0.3104856;
    b_[4] = 0.55000 * b_[4] + white * 0.5329522;
    b_[5] = -0.7616 * b_[5] - white * 0.0168980;
    const double pink = b_[0] + b_[1] + b_[2] + b_[3] + b_[4] + b_[5] + b_[6] + white * 0.5362;
    b_[6] = white * 0.115926;
    return pink;
  }

 private:
  double b_[7] = {};
};

// Per-channel offset, in dB, that turns A-weighted dBFS into dBA SPL.
class SensitivityMap {
 public:
  SensitivityMap() = default;
  explicit SensitivityMap(std::vector<double> offsets_db);

  std::size_t size() const { return offsets_.size(); }
  double offset(int channel) const;
  void set_offset(int channel, double offset_db);
  const std::vector<double>& offsets() const { return offsets_; }

  friend bool operator==(const SensitivityMap&, const SensitivityMap&) = default;

 private:
  std::vector<double> offsets_;
};

// A-weighted equivalent (full-duration RMS) level of `channel` in dBA.
double EquivalentLevel(const AudioBuffer& buf, const SensitivityMap& sensitivity,
                       int channel);

}  // namespace carsynth

#endif  // CARSYNTH_DSP_H_
