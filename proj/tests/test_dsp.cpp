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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "aqa/common.hpp"
#include "aqa/dsp.hpp"

using namespace aqa;

namespace {

std::vector<float> sine(double freq, double amplitude, double seconds,
                        double sample_rate) {
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  std::vector<float> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<float>(
        amplitude * std::sin(2.0 * std::numbers::pi * freq * i / sample_rate));
  }
  return x;
}

}  // namespace

TEST_CASE("k-weighting coefficients match the standard at 48 kHz") {
  const auto kf = dsp::KWeightingFilter::for_rate(48000.0);
  CHECK(kf.stage1.b0 == doctest::Approx(1.53512485958697).epsilon(1e-9));
  CHECK(kf.stage1.a1 == doctest::Approx(-1.69065929318241).epsilon(1e-9));
  CHECK(kf.stage2.a1 == doctest::Approx(-1.99004745483398).epsilon(1e-9));
  CHECK(kf.stage2.a2 == doctest::Approx(0.99007225036621).epsilon(1e-9));

  // The analog-prototype path must land on the same values within 1e-6.
  const auto derived = dsp::KWeightingFilter::for_rate(48000.0 + 1e-9);
  CHECK(std::abs(derived.stage1.b0 - kf.stage1.b0) < 1e-6);
  CHECK(std::abs(derived.stage1.b1 - kf.stage1.b1) < 1e-6);
  CHECK(std::abs(derived.stage1.b2 - kf.stage1.b2) < 1e-6);
  CHECK(std::abs(derived.stage1.a1 - kf.stage1.a1) < 1e-6);
  CHECK(std::abs(derived.stage1.a2 - kf.stage1.a2) < 1e-6);
  CHECK(std::abs(derived.stage2.a1 - kf.stage2.a1) < 1e-6);
  CHECK(std::abs(derived.stage2.a2 - kf.stage2.a2) < 1e-6);
}

TEST_CASE("k-filter response is ~0 dB at 1 kHz net of the -0.691 constant") {
  // The raw K-filter sits ~+0.691 dB at 1 kHz; the integration formula's
  // -0.691 term cancels it, so the effective weighting is 0 dB there.
  const auto kf = dsp::KWeightingFilter::for_rate(48000.0);
  const double mag = kf.stage1.magnitude_at(1000.0, 48000.0) *
                     kf.stage2.magnitude_at(1000.0, 48000.0);
  const double db = 20.0 * std::log10(mag) - 0.691;
  CHECK(std::abs(db) < 0.1);
}

TEST_CASE("997 Hz full-scale sine reads -3.01 LUFS") {
  const auto x = sine(997.0, 1.0, 5.0, 48000.0);
  const double lufs = dsp::lufs_integrated(x, 48000.0);
  CHECK(lufs == doctest::Approx(-3.01).epsilon(0.0).scale(1.0).epsilon(0.04));
  CHECK(std::abs(lufs - (-3.01)) < 0.1);
}

TEST_CASE("loudness gain law") {
  const auto x = sine(997.0, 0.5, 3.0, 48000.0);
  auto half = x;
  for (auto& s : half) s *= 0.5f;
  const double l1 = dsp::lufs_integrated(x, 48000.0);
  const double l2 = dsp::lufs_integrated(half, 48000.0);
  CHECK(std::abs((l1 - l2) - 6.0206) < 0.05);
}

TEST_CASE("silence gates to the -inf sentinel") {
  std::vector<float> zeros(48000, 0.0f);
  const double lufs = dsp::lufs_integrated(zeros, 48000.0);
  CHECK(std::isinf(lufs));
  CHECK(lufs < 0);
}

TEST_CASE("too-short input is rejected") {
  std::vector<float> x(1000, 0.1f);
  CHECK_THROWS_AS(dsp::lufs_integrated(x, 48000.0), Error);
}

TEST_CASE("spectral centroid of a pure tone") {
  const auto x = sine(1000.0, 0.8, 1.0, 48000.0);
  CHECK(dsp::spectral_centroid(x, 48000.0) == doctest::Approx(1000.0).epsilon(0.025));
}

TEST_CASE("spectral centroid of a two-tone mix") {
  auto x = sine(500.0, 0.5, 1.0, 48000.0);
  const auto y = sine(1500.0, 0.5, 1.0, 48000.0);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
  // Equal-amplitude lines at 500 and 1500 Hz average to 1000 Hz.
  CHECK(std::abs(dsp::spectral_centroid(x, 48000.0) - 1000.0) < 50.0);
}

TEST_CASE("white noise centroid sits high") {
  Pcg32 rng(7);
  std::vector<float> x(48000);
  for (auto& s : x) s = static_cast<float>(rng.uniform(-1.0, 1.0));
  CHECK(dsp::spectral_centroid(x, 48000.0) > 5000.0);
}

TEST_CASE("centroid of silence throws") {
  std::vector<float> zeros(4096, 0.0f);
  CHECK_THROWS_AS(dsp::spectral_centroid(zeros, 48000.0), Error);
}

TEST_CASE("reverb identity at wet_dry 0") {
  const auto x = sine(440.0, 0.5, 0.5, 48000.0);
  dsp::ReverbParams p;
  p.wet_dry = 0.0;
  p.rt60_s = 0.3;
  p.ir_length_s = 0.3;
  const auto y = dsp::apply_reverb(x, p, 48000.0);
  CHECK(y == x);
}

TEST_CASE("reverb determinism") {
  const auto x = sine(440.0, 0.5, 0.5, 48000.0);
  dsp::ReverbParams p;
  p.wet_dry = 0.4;
  p.rt60_s = 0.25;
  p.ir_length_s = 0.3;
  p.seed = 99;
  CHECK(dsp::apply_reverb(x, p, 48000.0) == dsp::apply_reverb(x, p, 48000.0));
}

TEST_CASE("impulse response decays 60 dB over rt60") {
  dsp::ReverbParams p;
  p.wet_dry = 1.0;
  p.rt60_s = 0.4;
  p.ir_length_s = 0.5;
  p.seed = 5;
  // Feed a unit impulse; the output (wet only) is the IR itself.
  std::vector<float> impulse(static_cast<std::size_t>(0.5 * 48000), 0.0f);
  impulse[0] = 1.0f;
  const auto y = dsp::apply_reverb(impulse, p, 48000.0);

  // Fit the log RMS envelope over 10 ms windows, skipping the direct spike.
  const std::size_t win = 480;
  std::vector<double> t, level;
  for (std::size_t start = win; start + win < y.size(); start += win) {
    double acc = 0;
    for (std::size_t i = start; i < start + win; ++i) acc += double(y[i]) * y[i];
    const double rms = std::sqrt(acc / win);
    if (rms <= 0) break;
    t.push_back((start + win / 2.0) / 48000.0);
    level.push_back(20.0 * std::log10(rms));
  }
  REQUIRE(t.size() > 5);
  // Least-squares slope in dB/s.
  double mt = 0, ml = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    ml += level[i];
  }
  mt /= double(t.size());
  ml /= double(t.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - mt) * (level[i] - ml);
    den += (t[i] - mt) * (t[i] - mt);
  }
  const double slope = num / den;             // dB per second
  const double rt60_est = -60.0 / slope;      // time to fall 60 dB
  CHECK(rt60_est == doctest::Approx(0.4).epsilon(0.10));
}

TEST_CASE("reverb linearity before renormalization") {
  const auto x = sine(440.0, 0.05, 0.4, 48000.0);
  auto x2 = x;
  for (auto& s : x2) s *= 2.0f;
  dsp::ReverbParams p;
  p.wet_dry = 0.35;
  p.rt60_s = 0.2;
  p.ir_length_s = 0.25;
  p.seed = 3;
  const auto y1 = dsp::apply_reverb(x, p, 48000.0);
  const auto y2 = dsp::apply_reverb(x2, p, 48000.0);
  for (std::size_t i = 0; i < y1.size(); i += 997) {
    CHECK(y2[i] == doctest::Approx(2.0f * y1[i]).epsilon(1e-4));
  }
}

TEST_CASE("uniform noise hits the requested snr") {
  const auto x = sine(315.0, 0.6, 2.0, 48000.0);
  const auto y = dsp::add_uniform_noise(x, 0.0, 42);
  std::vector<float> noise(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) noise[i] = y[i] - x[i];
  const double ps = dsp::mean_square(x);
  const double pn = dsp::mean_square(noise);
  CHECK(std::abs(pn / ps - 1.0) < 0.05);  // snr 0 dB -> equal powers
}

TEST_CASE("noise sentinel and error paths") {
  const auto x = sine(315.0, 0.6, 0.5, 48000.0);
  const auto y =
      dsp::add_uniform_noise(x, std::numeric_limits<double>::infinity(), 1);
  CHECK(y == x);
  CHECK(dsp::add_uniform_noise(x, 30.0, 1) != dsp::add_uniform_noise(x, 30.0, 2));
  std::vector<float> zeros(100, 0.0f);
  CHECK_THROWS_AS(dsp::add_uniform_noise(zeros, 10.0, 1), Error);
}
