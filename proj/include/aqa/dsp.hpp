// Copyright 2026 AQA Workbench contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AQA_DSP_HPP_
#define AQA_DSP_HPP_

#include <complex>
#include <cstdint>
#include <vector>

namespace aqa::dsp {

// ---------------------------------------------------------------------------
// FFT (iterative radix-2, power-of-two sizes only)
// ---------------------------------------------------------------------------

// In-place complex FFT. n must be a power of two. inverse applies 1/n scaling.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// Linear convolution via zero-padded FFT; output length = |x| + |h| - 1.
std::vector<float> fft_convolve(const std::vector<float>& x,
                                const std::vector<float>& h);

// ---------------------------------------------------------------------------
// Loudness (integrated, BS.1770-4 two-stage K-weighting + gating)
// ---------------------------------------------------------------------------

struct Biquad {
  // y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
  double b0, b1, b2, a1, a2;

  // Magnitude response at frequency f for sample rate fs.
  double magnitude_at(double f, double fs) const;
};

struct KWeightingFilter {
  Biquad stage1;  // high shelf
  Biquad stage2;  // high pass

  // 48 kHz uses the tabulated standard coefficients; other rates are derived
  // from the analog prototypes via bilinear transform.
  static KWeightingFilter for_rate(double sample_rate);
};

// Returned for digital silence / fully gated input.
double lufs_silence_sentinel();

// Integrated loudness. Throws Error(kData) if the input is shorter than one
// 400 ms block. Returns the -inf sentinel when no block passes the absolute
// gate.
double lufs_integrated(const std::vector<float>& waveform, double sample_rate);

// ---------------------------------------------------------------------------
// Brightness proxy
// ---------------------------------------------------------------------------

// Mean spectral centroid (Hz) over 2048-sample Hann frames, hop 1024.
// Frames with negligible energy are skipped; all-silent input throws.
double spectral_centroid(const std::vector<float>& waveform,
                         double sample_rate);

// ---------------------------------------------------------------------------
// Scene corruption
// ---------------------------------------------------------------------------

struct ReverbParams {
  double rt60_s = 0.3;
  double ir_length_s = 0.4;
  double wet_dry = 0.3;  // 0 = dry only
  std::uint64_t seed = 0;
};

// Synthetic impulse response: unit impulse followed by an exponentially
// decaying Gaussian noise tail with decay rate ln(1000)/rt60.
std::vector<float> make_impulse_response(const ReverbParams& params,
                                         double sample_rate);

// (1-wet_dry)*dry + wet_dry*conv(x, ir); output trimmed back to |x| samples
// and peak-renormalized only if it clips.
std::vector<float> apply_reverb(const std::vector<float>& waveform,
                                const ReverbParams& params,
                                double sample_rate);

// Additive zero-mean uniform noise at the requested SNR. +inf snr_db is the
// "disabled" sentinel (identity). Throws on an all-zero signal.
std::vector<float> add_uniform_noise(const std::vector<float>& waveform,
                                     double snr_db, std::uint64_t seed);

double mean_square(const std::vector<float>& x);

}  // namespace aqa::dsp

#endif  // AQA_DSP_HPP_
