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

#include "aqa/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "aqa/common.hpp"

namespace aqa::dsp {

namespace {
constexpr double kPi = std::numbers::pi;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}
}  // namespace

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw_numeric("fft size must be a power of two");
  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

std::vector<float> fft_convolve(const std::vector<float>& x,
                                const std::vector<float>& h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<std::complex<double>> fx(n), fh(n);
  for (std::size_t i = 0; i < x.size(); ++i) fx[i] = x[i];
  for (std::size_t i = 0; i < h.size(); ++i) fh[i] = h[i];
  fft_inplace(fx, false);
  fft_inplace(fh, false);
  for (std::size_t i = 0; i < n; ++i) fx[i] *= fh[i];
  fft_inplace(fx, true);
  std::vector<float> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    out[i] = static_cast<float>(fx[i].real());
  }
  return out;
}

// ---------------------------------------------------------------------------
// K-weighting
// ---------------------------------------------------------------------------

double Biquad::magnitude_at(double f, double fs) const {
  const double w = 2.0 * kPi * f / fs;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  const std::complex<double> num = b0 + b1 * z1 + b2 * z2;
  const std::complex<double> den = 1.0 + a1 * z1 + a2 * z2;
  return std::abs(num / den);
}

KWeightingFilter KWeightingFilter::for_rate(double fs) {
  KWeightingFilter kf;
  if (fs == 48000.0) {
    // ITU-R BS.1770-4 Tables 1 and 2.
    kf.stage1 = {1.53512485958697, -2.69169618940638, 1.19839281085285,
                 -1.69065929318241, 0.73248077421585};
    kf.stage2 = {1.0, -2.0, 1.0, -1.99004745483398, 0.99007225036621};
    return kf;
  }
  // Analog prototype parameters that reproduce the standard's tabulated
  // 48 kHz coefficients (Mansbridge/Finn/Reiss parameterization).
  {
    const double db = 3.999843853973347;
    const double f0 = 1681.974450955533;
    const double q = 0.7071752369554196;
    const double k = std::tan(kPi * f0 / fs);
    const double vh = std::pow(10.0, db / 20.0);
    const double vb = std::pow(vh, 0.4996667741545416);
    const double a0 = 1.0 + k / q + k * k;
    kf.stage1.b0 = (vh + vb * k / q + k * k) / a0;
    kf.stage1.b1 = 2.0 * (k * k - vh) / a0;
    kf.stage1.b2 = (vh - vb * k / q + k * k) / a0;
    kf.stage1.a1 = 2.0 * (k * k - 1.0) / a0;
    kf.stage1.a2 = (1.0 - k / q + k * k) / a0;
  }
  {
    const double f0 = 38.13547087602444;
    const double q = 0.5003270373238773;
    const double k = std::tan(kPi * f0 / fs);
    const double a0 = 1.0 + k / q + k * k;
    kf.stage2.b0 = 1.0;
    kf.stage2.b1 = -2.0;
    kf.stage2.b2 = 1.0;
    kf.stage2.a1 = 2.0 * (k * k - 1.0) / a0;
    kf.stage2.a2 = (1.0 - k / q + k * k) / a0;
  }
  return kf;
}

double lufs_silence_sentinel() {
  return -std::numeric_limits<double>::infinity();
}

namespace {

std::vector<double> biquad_filter(const Biquad& bq, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    double yn = bq.b0 * x[n] + bq.b1 * x1 + bq.b2 * x2 - bq.a1 * y1 - bq.a2 * y2;
    x2 = x1;
    x1 = x[n];
    y2 = y1;
    y1 = yn;
    y[n] = yn;
  }
  return y;
}

}  // namespace

double lufs_integrated(const std::vector<float>& waveform, double sample_rate) {
  const std::size_t block = static_cast<std::size_t>(std::lround(0.400 * sample_rate));
  const std::size_t step = static_cast<std::size_t>(std::lround(0.100 * sample_rate));
  if (waveform.size() < block) {
    throw_data("lufs_integrated: input shorter than one 400 ms block");
  }

  const KWeightingFilter kf = KWeightingFilter::for_rate(sample_rate);
  std::vector<double> x(waveform.begin(), waveform.end());
  x = biquad_filter(kf.stage1, x);
  x = biquad_filter(kf.stage2, x);

  // Mean square over 400 ms blocks, 75% overlap.
  std::vector<double> block_ms;
  for (std::size_t start = 0; start + block <= x.size(); start += step) {
    double acc = 0.0;
    for (std::size_t i = start; i < start + block; ++i) acc += x[i] * x[i];
    block_ms.push_back(acc / static_cast<double>(block));
  }

  auto loudness_of = [](double ms) { return -0.691 + 10.0 * std::log10(ms); };

  // Absolute gate at -70 LUFS.
  std::vector<double> abs_gated;
  for (double ms : block_ms) {
    if (ms > 0.0 && loudness_of(ms) > -70.0) abs_gated.push_back(ms);
  }
  if (abs_gated.empty()) return lufs_silence_sentinel();

  double mean_abs = 0.0;
  for (double ms : abs_gated) mean_abs += ms;
  mean_abs /= static_cast<double>(abs_gated.size());
  const double rel_threshold = loudness_of(mean_abs) - 10.0;

  double mean_rel = 0.0;
  std::size_t count = 0;
  for (double ms : abs_gated) {
    if (loudness_of(ms) > rel_threshold) {
      mean_rel += ms;
      ++count;
    }
  }
  if (count == 0) return lufs_silence_sentinel();
  mean_rel /= static_cast<double>(count);
  return loudness_of(mean_rel);
}

// ---------------------------------------------------------------------------
// Spectral centroid
// ---------------------------------------------------------------------------

double spectral_centroid(const std::vector<float>& waveform, double sample_rate) {
  constexpr std::size_t kFrame = 2048;
  constexpr std::size_t kHop = 1024;
  if (waveform.empty()) throw_data("spectral_centroid: empty input");

  std::vector<double> window(kFrame);
  for (std::size_t i = 0; i < kFrame; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / kFrame);
  }

  double centroid_sum = 0.0;
  std::size_t frames = 0;
  std::vector<std::complex<double>> buf(kFrame);
  const std::size_t n_offsets =
      waveform.size() >= kFrame ? (waveform.size() - kFrame) / kHop + 1 : 1;
  for (std::size_t f = 0; f < n_offsets; ++f) {
    const std::size_t start = f * kHop;
    for (std::size_t i = 0; i < kFrame; ++i) {
      const std::size_t idx = start + i;
      const double s = idx < waveform.size() ? waveform[idx] : 0.0;
      buf[i] = s * window[i];
    }
    fft_inplace(buf, false);
    double wsum = 0.0, fsum = 0.0;
    for (std::size_t k = 0; k <= kFrame / 2; ++k) {
      const double mag = std::abs(buf[k]);
      const double freq = static_cast<double>(k) * sample_rate / kFrame;
      wsum += mag;
      fsum += mag * freq;
    }
    if (wsum > 1e-9) {
      centroid_sum += fsum / wsum;
      ++frames;
    }
  }
  if (frames == 0) throw_data("spectral_centroid: input is silent");
  return centroid_sum / static_cast<double>(frames);
}

// ---------------------------------------------------------------------------
// Reverb and noise
// ---------------------------------------------------------------------------

std::vector<float> make_impulse_response(const ReverbParams& params,
                                         double sample_rate) {
  if (params.rt60_s <= 0.0) throw_data("reverb: rt60 must be positive");
  if (params.ir_length_s < params.rt60_s) {
    throw_data("reverb: ir_length_s must cover rt60_s");
  }
  if (params.wet_dry < 0.0 || params.wet_dry > 1.0) {
    throw_data("reverb: wet_dry must be in [0, 1]");
  }
  const std::size_t n =
      static_cast<std::size_t>(std::lround(params.ir_length_s * sample_rate)) + 1;
  std::vector<float> ir(n, 0.0f);
  ir[0] = 1.0f;
  const double decay = std::log(1000.0) / params.rt60_s;  // 60 dB over rt60
  constexpr double kTailGain = 0.25;
  Pcg32 rng(derive_seed(params.seed, "reverb-ir"));
  for (std::size_t i = 1; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    ir[i] = static_cast<float>(kTailGain * rng.gaussian() * std::exp(-decay * t));
  }
  return ir;
}

std::vector<float> apply_reverb(const std::vector<float>& waveform,
                                const ReverbParams& params, double sample_rate) {
  if (params.wet_dry == 0.0) return waveform;
  const std::vector<float> ir = make_impulse_response(params, sample_rate);
  std::vector<float> wet = fft_convolve(waveform, ir);
  std::vector<float> out(waveform.size());
  const float dry_gain = static_cast<float>(1.0 - params.wet_dry);
  const float wet_gain = static_cast<float>(params.wet_dry);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = dry_gain * waveform[i] + wet_gain * wet[i];
  }
  float peak = 0.0f;
  for (float s : out) peak = std::max(peak, std::abs(s));
  if (peak > 1.0f) {
    const float scale = 1.0f / peak;
    for (float& s : out) s *= scale;
  }
  return out;
}

double mean_square(const std::vector<float>& x) {
  double acc = 0.0;
  for (float s : x) acc += static_cast<double>(s) * s;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

std::vector<float> add_uniform_noise(const std::vector<float>& waveform,
                                     double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return waveform;
  if (!std::isfinite(snr_db)) throw_data("add_uniform_noise: snr_db must be finite");
  const double p_signal = mean_square(waveform);
  if (p_signal <= 0.0) throw_data("add_uniform_noise: SNR undefined for silent signal");
  const double p_noise = p_signal / std::pow(10.0, snr_db / 10.0);
  const double amp = std::sqrt(3.0 * p_noise);  // uniform [-a,a] has power a^2/3
  Pcg32 rng(derive_seed(seed, "uniform-noise"));
  std::vector<float> out(waveform.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = waveform[i] + static_cast<float>(rng.uniform(-amp, amp));
  }
  return out;
}

}  // namespace aqa::dsp
