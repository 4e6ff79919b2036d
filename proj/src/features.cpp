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

#include "aqa/features.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "aqa/common.hpp"
#include "aqa/dsp.hpp"

using nlohmann::json;

namespace aqa::feat {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr float kLogEps = 1e-10f;
constexpr std::uint32_t kAqafVersion = 1;

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }
}  // namespace

int frame_count(std::size_t n_samples, const MelParams& p) {
  if (n_samples < static_cast<std::size_t>(p.window)) return 0;
  return static_cast<int>((n_samples - static_cast<std::size_t>(p.window)) /
                          static_cast<std::size_t>(p.hop)) + 1;
}

std::vector<double> mel_filterbank(const MelParams& p) {
  const int n_bins = p.window / 2 + 1;
  std::vector<double> bank(static_cast<std::size_t>(p.n_mels) * n_bins, 0.0);

  const double mel_lo = hz_to_mel(p.fmin_hz);
  const double mel_hi = hz_to_mel(p.fmax_hz);
  std::vector<double> edges(static_cast<std::size_t>(p.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                            static_cast<double>(p.n_mels + 1);
  }

  // Triangles evaluated in mel space: between adjacent centers the rising
  // and falling weights sum to exactly one.
  for (int m = 0; m < p.n_mels; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double center = edges[static_cast<std::size_t>(m) + 1];
    const double hi = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * p.sample_rate / p.window;
      const double mel = hz_to_mel(f);
      double w = 0.0;
      if (mel > lo && mel < hi) {
        w = mel <= center ? (mel - lo) / (center - lo) : (hi - mel) / (hi - center);
      }
      bank[static_cast<std::size_t>(m) * n_bins + static_cast<std::size_t>(k)] = w;
    }
  }
  return bank;
}

Spectrogram melspec(const std::vector<float>& waveform, const MelParams& p) {
  const int frames = frame_count(waveform.size(), p);
  if (frames <= 0) {
    throw_data("melspec: waveform shorter than one analysis window");
  }
  const int n_bins = p.window / 2 + 1;
  const std::vector<double> bank = mel_filterbank(p);

  std::vector<double> window(static_cast<std::size_t>(p.window));
  for (int i = 0; i < p.window; ++i) {
    window[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * kPi * i / p.window);
  }

  Spectrogram out;
  out.n_mels = p.n_mels;
  out.n_frames = frames;
  out.valid_frames = frames;
  out.data.assign(static_cast<std::size_t>(p.n_mels) * frames, 0.0f);

  std::vector<std::complex<double>> buf(static_cast<std::size_t>(p.window));
  std::vector<double> power(static_cast<std::size_t>(n_bins));
  for (int f = 0; f < frames; ++f) {
    const std::size_t start = static_cast<std::size_t>(f) * p.hop;
    for (int i = 0; i < p.window; ++i) {
      buf[static_cast<std::size_t>(i)] =
          waveform[start + static_cast<std::size_t>(i)] * window[static_cast<std::size_t>(i)];
    }
    dsp::fft_inplace(buf, false);
    for (int k = 0; k < n_bins; ++k) {
      power[static_cast<std::size_t>(k)] = std::norm(buf[static_cast<std::size_t>(k)]);
    }
    for (int m = 0; m < p.n_mels; ++m) {
      double acc = 0.0;
      const double* row = bank.data() + static_cast<std::size_t>(m) * n_bins;
      for (int k = 0; k < n_bins; ++k) acc += row[k] * power[static_cast<std::size_t>(k)];
      out.at(m, f) = std::log(static_cast<float>(acc) + kLogEps);
    }
  }
  return out;
}

Spectrogram pad_to(const Spectrogram& spec, int target_frames) {
  if (spec.valid_frames > target_frames) {
    throw_data("pad_to: spectrogram exceeds the target frame budget");
  }
  Spectrogram out;
  out.n_mels = spec.n_mels;
  out.n_frames = target_frames;
  out.valid_frames = spec.valid_frames;
  out.scene_id = spec.scene_id;
  out.data.assign(static_cast<std::size_t>(spec.n_mels) * target_frames, 0.0f);
  for (int m = 0; m < spec.n_mels; ++m) {
    for (int f = 0; f < spec.valid_frames; ++f) out.at(m, f) = spec.at(m, f);
  }
  return out;
}

Spectrogram resize_bilinear(const Spectrogram& spec, int target_frames) {
  if (spec.valid_frames < 2) throw_data("resize_bilinear: needs at least 2 frames");
  Spectrogram out;
  out.n_mels = spec.n_mels;
  out.n_frames = target_frames;
  out.valid_frames = target_frames;
  out.scene_id = spec.scene_id;
  out.data.assign(static_cast<std::size_t>(spec.n_mels) * target_frames, 0.0f);
  const double scale =
      static_cast<double>(spec.valid_frames - 1) / (target_frames - 1);
  for (int f = 0; f < target_frames; ++f) {
    const double src = f * scale;
    const int lo = std::min(static_cast<int>(src), spec.valid_frames - 2);
    const double frac = src - lo;
    for (int m = 0; m < spec.n_mels; ++m) {
      out.at(m, f) = static_cast<float>((1.0 - frac) * spec.at(m, lo) +
                                        frac * spec.at(m, lo + 1));
    }
  }
  return out;
}

NormStats fit_norm(const std::vector<const Spectrogram*>& train_specs) {
  if (train_specs.empty()) throw_data("fit_norm: no spectrograms");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto* s : train_specs) {
    for (int m = 0; m < s->n_mels; ++m) {
      for (int f = 0; f < s->valid_frames; ++f) sum += s->at(m, f);
    }
    count += static_cast<std::size_t>(s->n_mels) * s->valid_frames;
  }
  const double mean = sum / static_cast<double>(count);
  double var = 0.0;
  for (const auto* s : train_specs) {
    for (int m = 0; m < s->n_mels; ++m) {
      for (int f = 0; f < s->valid_frames; ++f) {
        const double d = s->at(m, f) - mean;
        var += d * d;
      }
    }
  }
  var /= static_cast<double>(count);
  if (var <= 0.0) throw_numeric("fit_norm: degenerate statistics (zero variance)");
  NormStats stats;
  stats.mean = mean;
  stats.std_dev = std::sqrt(var);
  return stats;
}

Spectrogram normalize(const Spectrogram& spec, const NormStats& stats) {
  if (stats.std_dev <= 0.0) throw_numeric("normalize: std must be positive");
  Spectrogram out = spec;
  for (int m = 0; m < out.n_mels; ++m) {
    for (int f = 0; f < out.valid_frames; ++f) {
      out.at(m, f) = static_cast<float>((spec.at(m, f) - stats.mean) / stats.std_dev);
    }
    // Padded columns stay zero so padding carries no information.
  }
  return out;
}

namespace {
void put_u32(std::ofstream& f, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  f.write(b, 4);
}
std::uint32_t get_u32(std::ifstream& f) {
  char b[4];
  f.read(b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  }
  return v;
}
}  // namespace

void save_aqaf(const Spectrogram& spec, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw_data("cannot write feature file: " + path);
  f.write("AQAF", 4);
  put_u32(f, kAqafVersion);
  put_u32(f, static_cast<std::uint32_t>(spec.n_mels));
  put_u32(f, static_cast<std::uint32_t>(spec.n_frames));
  put_u32(f, static_cast<std::uint32_t>(spec.valid_frames));
  f.write(reinterpret_cast<const char*>(spec.data.data()),
          static_cast<std::streamsize>(spec.data.size() * sizeof(float)));
  if (!f) throw_data("short write: " + path);
}

Spectrogram load_aqaf(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw_data("cannot open feature file: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "AQAF", 4) != 0) {
    throw_data("bad magic in feature file: " + path);
  }
  const std::uint32_t version = get_u32(f);
  if (version != kAqafVersion) {
    throw_incompat("unsupported feature file version in " + path);
  }
  Spectrogram spec;
  spec.n_mels = static_cast<int>(get_u32(f));
  spec.n_frames = static_cast<int>(get_u32(f));
  spec.valid_frames = static_cast<int>(get_u32(f));
  spec.data.resize(static_cast<std::size_t>(spec.n_mels) * spec.n_frames);
  f.read(reinterpret_cast<char*>(spec.data.data()),
         static_cast<std::streamsize>(spec.data.size() * sizeof(float)));
  if (!f) throw_data("truncated feature file: " + path);
  return spec;
}

void save_norm_stats(const NormStats& stats, const std::string& path) {
  json doc = {{"mean", stats.mean},
              {"std", stats.std_dev},
              {"split", stats.computed_over}};
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw_data("cannot write stats file: " + path);
  f << doc.dump(2) << "\n";
}

NormStats load_norm_stats(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw_data("cannot open stats file: " + path);
  json doc = json::parse(f);
  NormStats stats;
  stats.mean = doc.at("mean").get<double>();
  stats.std_dev = doc.at("std").get<double>();
  stats.computed_over = doc.at("split").get<std::string>();
  return stats;
}

}  // namespace aqa::feat
