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

#include "aqa/soundbank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>

#include <json.hpp>

#include "aqa/common.hpp"
#include "aqa/dsp.hpp"
#include "aqa/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace aqa::bank {

const std::array<std::string, 6> kInstruments = {"bass",  "cello",   "clarinet",
                                                 "flute", "trumpet", "violin"};
const std::array<std::string, 12> kNotes = {"A", "A#", "B",  "C", "C#", "D",
                                            "D#", "E",  "F", "F#", "G", "G#"};

namespace {
constexpr double kPi = std::numbers::pi;
constexpr const char* kGeneratorVersion = "aqa-bank-1";

// Semitone offset from C within an octave, per chromatic label.
int note_offset(const std::string& note) {
  static const std::map<std::string, int> offsets = {
      {"C", 0}, {"C#", 1}, {"D", 2},  {"D#", 3}, {"E", 4},   {"F", 5},
      {"F#", 6}, {"G", 7},  {"G#", 8}, {"A", 9},  {"A#", 10}, {"B", 11}};
  auto it = offsets.find(note);
  if (it == offsets.end()) throw_data("unknown note label: " + note);
  return it->second;
}

const std::vector<Timbre>& timbres() {
  static const std::vector<Timbre> t = {
      {"bass",
       {1.0, 0.70, 0.45, 0.28, 0.14, 0.07, 0.03},
       {0.040, 0.120, 0.80, 0.150},
       4.5,
       5.0},
      {"cello",
       {1.0, 0.85, 0.70, 0.55, 0.40, 0.30, 0.22, 0.15, 0.10, 0.06},
       {0.060, 0.100, 0.75, 0.180},
       5.0,
       10.0},
      {"clarinet",
       {1.0, 0.04, 0.55, 0.03, 0.35, 0.02, 0.20, 0.015, 0.10},
       {0.030, 0.060, 0.85, 0.120},
       4.8,
       3.0},
      {"flute",
       {1.0, 0.32, 0.12, 0.05, 0.02},
       {0.050, 0.080, 0.82, 0.140},
       5.5,
       6.0},
      {"trumpet",
       {1.0, 0.92, 0.85, 0.74, 0.64, 0.54, 0.45, 0.37, 0.30, 0.23, 0.17, 0.12},
       {0.025, 0.070, 0.88, 0.110},
       5.2,
       4.0},
      {"violin",
       {1.0, 0.80, 0.65, 0.50, 0.42, 0.33, 0.26, 0.20, 0.15, 0.10},
       {0.055, 0.090, 0.78, 0.160},
       6.0,
       11.0},
  };
  return t;
}

double envelope_at(const Envelope& env, double t, double duration) {
  if (t < env.attack_s) return t / env.attack_s;
  const double release_start = duration - env.release_s;
  if (t >= release_start) {
    const double frac = (duration - t) / env.release_s;
    return std::max(0.0, env.sustain_level * frac);
  }
  if (t < env.attack_s + env.decay_s) {
    const double frac = (t - env.attack_s) / env.decay_s;
    return 1.0 + (env.sustain_level - 1.0) * frac;
  }
  return env.sustain_level;
}

struct Combo {
  int instrument, note, octave;
};

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void annotate(ElementarySound& s) {
  s.brightness_value = dsp::spectral_centroid(s.waveform, s.sample_rate);
  s.loudness_lufs = dsp::lufs_integrated(s.waveform, s.sample_rate);
}

void apply_labels(Bank& b) {
  for (auto& s : b.sounds) {
    s.brightness_label =
        s.brightness_value > b.brightness_threshold_hz ? "bright" : "dark";
    s.loudness_label =
        s.loudness_lufs > b.loudness_threshold_lufs ? "loud" : "quiet";
  }
}

// 135 of 216: deterministic shuffle, take the first 135, then repair any
// instrument/note/octave value that fell out entirely.
std::vector<Combo> select_combos(std::uint64_t master_seed) {
  std::vector<Combo> grid;
  grid.reserve(216);
  for (int i = 0; i < 6; ++i)
    for (int n = 0; n < 12; ++n)
      for (int o = 0; o < 3; ++o) grid.push_back({i, n, o});

  Pcg32 rng(derive_seed(master_seed, "bank-combo-shuffle"));
  for (std::size_t i = grid.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(grid[i], grid[j]);
  }
  std::vector<Combo> picked(grid.begin(), grid.begin() + kBankSize);
  std::vector<Combo> rest(grid.begin() + kBankSize, grid.end());

  auto counts = [&picked]() {
    std::array<int, 6> inst{};
    std::array<int, 12> note{};
    std::array<int, 3> oct{};
    for (const auto& c : picked) {
      ++inst[c.instrument];
      ++note[c.note];
      ++oct[c.octave];
    }
    return std::tuple(inst, note, oct);
  };

  // Swap in a combo carrying the missing value for one whose attributes all
  // stay covered after removal.
  auto repair = [&](auto get_value, int missing) {
    auto [inst, note, oct] = counts();
    for (std::size_t r = 0; r < rest.size(); ++r) {
      if (get_value(rest[r]) != missing) continue;
      for (std::size_t p = 0; p < picked.size(); ++p) {
        const Combo& victim = picked[p];
        if (inst[victim.instrument] < 2 || note[victim.note] < 2 ||
            oct[victim.octave] < 2) {
          continue;
        }
        std::swap(picked[p], rest[r]);
        return;
      }
    }
    throw_numeric("bank combo repair failed");
  };

  for (int v = 0; v < 6; ++v) {
    auto [inst, note, oct] = counts();
    if (inst[v] == 0) repair([](const Combo& c) { return c.instrument; }, v);
  }
  for (int v = 0; v < 12; ++v) {
    auto [inst, note, oct] = counts();
    if (note[v] == 0) repair([](const Combo& c) { return c.note; }, v);
  }
  for (int v = 0; v < 3; ++v) {
    auto [inst, note, oct] = counts();
    if (oct[v] == 0) repair([](const Combo& c) { return c.octave; }, v);
  }
  return picked;
}

Bank synthesize_bank(const std::string& split, std::uint64_t master_seed) {
  if (split != "train" && split != "test") {
    throw_data("bank split must be train or test, got: " + split);
  }
  Bank b;
  b.split = split;
  b.master_seed = master_seed;
  const auto combos = select_combos(master_seed);
  b.sounds.reserve(combos.size());
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const auto& c = combos[i];
    const std::string& inst = kInstruments[static_cast<std::size_t>(c.instrument)];
    const std::string& note = kNotes[static_cast<std::size_t>(c.note)];
    const int octave = kOctaves[static_cast<std::size_t>(c.octave)];
    const std::uint64_t sound_seed = derive_seed(
        master_seed, split + "/" + inst + "/" + note, static_cast<std::uint64_t>(octave));
    Pcg32 rng(derive_seed(sound_seed, "duration"));
    const double duration = rng.uniform(kMinDuration, kMaxDuration);

    ElementarySound s;
    s.instrument = inst;
    s.note = note;
    s.octave = octave;
    s.duration_s = duration;
    char idbuf[64];
    std::snprintf(idbuf, sizeof(idbuf), "%s_%03zu_%s_%s%d", split.c_str(), i,
                  inst.c_str(), note.c_str(), octave);
    s.id = idbuf;
    s.waveform = synth_note(timbre_for(inst), note, octave, duration, sound_seed);
    annotate(s);
    b.sounds.push_back(std::move(s));
  }
  return b;
}

}  // namespace

const Timbre& timbre_for(const std::string& instrument) {
  for (const auto& t : timbres()) {
    if (t.instrument_name == instrument) return t;
  }
  throw_data("unknown instrument: " + instrument);
}

const ElementarySound* Bank::find(const std::string& id) const {
  for (const auto& s : sounds) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

double note_to_frequency(const std::string& note, int octave) {
  if (octave < 0 || octave > 8) throw_data("octave out of range");
  const int semitone_index = octave * 12 + note_offset(note);  // from C0
  return 440.0 * std::pow(2.0, (semitone_index - 57) / 12.0);
}

std::vector<float> synth_note(const Timbre& timbre, const std::string& note,
                              int octave, double duration_s,
                              std::uint64_t variation_seed) {
  Pcg32 rng(derive_seed(variation_seed, "synth-variation"));

  Envelope env = timbre.envelope;
  env.attack_s *= rng.uniform(0.9, 1.1);
  env.decay_s *= rng.uniform(0.9, 1.1);
  env.release_s *= rng.uniform(0.9, 1.1);
  if (duration_s < env.attack_s + env.release_s) {
    throw_data("synth_note: duration too short for attack+release envelope");
  }

  const double detune_cents = rng.uniform(-10.0, 10.0);
  const double f0 =
      note_to_frequency(note, octave) * std::pow(2.0, detune_cents / 1200.0);

  std::vector<double> gains(timbre.harmonic_amplitudes.size());
  for (std::size_t k = 0; k < gains.size(); ++k) {
    const double db = rng.uniform(-2.0, 2.0);
    gains[k] = timbre.harmonic_amplitudes[k] * std::pow(10.0, db / 20.0);
  }

  const auto n_samples =
      static_cast<std::size_t>(std::lround(duration_s * kSampleRate));
  std::vector<float> out(n_samples, 0.0f);

  // Vibrato modulates the fundamental phase; harmonics stay phase-locked.
  const double vib_rate = timbre.vibrato_rate_hz;
  const double vib_depth = timbre.vibrato_depth_cents;
  double phase = 0.0;
  const double dt = 1.0 / kSampleRate;
  const double nyquist_cap = 0.45 * kSampleRate;
  for (std::size_t n = 0; n < n_samples; ++n) {
    const double t = static_cast<double>(n) * dt;
    const double inst_freq =
        f0 * std::pow(2.0, vib_depth * std::sin(2.0 * kPi * vib_rate * t) / 1200.0);
    phase += 2.0 * kPi * inst_freq * dt;
    double sample = 0.0;
    for (std::size_t k = 0; k < gains.size(); ++k) {
      const double hfreq = f0 * static_cast<double>(k + 1);
      if (hfreq > nyquist_cap) break;
      sample += gains[k] * std::sin(static_cast<double>(k + 1) * phase);
    }
    out[n] = static_cast<float>(sample * envelope_at(env, t, duration_s));
  }

  float peak = 0.0f;
  for (float s : out) peak = std::max(peak, std::abs(s));
  if (peak > 0.0f) {
    const float scale = 0.9f / peak;
    for (float& s : out) s *= scale;
  }
  return out;
}

Bank build_bank(const std::string& split, std::uint64_t master_seed) {
  Bank b = synthesize_bank(split, master_seed);
  // Thresholds are always the train medians; the test bank inherits them so
  // its labels are calibrated without looking at test data.
  Bank* source = &b;
  Bank train_bank;
  if (split != "train") {
    train_bank = synthesize_bank("train", master_seed);
    source = &train_bank;
  }
  std::vector<double> brightness, loudness;
  for (const auto& s : source->sounds) {
    brightness.push_back(s.brightness_value);
    loudness.push_back(s.loudness_lufs);
  }
  b.brightness_threshold_hz = median_of(brightness);
  b.loudness_threshold_lufs = median_of(loudness);
  apply_labels(b);
  return b;
}

Bank ingest_wav_dir(const std::string& wav_dir,
                    const std::vector<IngestEntry>& manifest) {
  std::map<std::string, const IngestEntry*> by_name;
  for (const auto& e : manifest) by_name[e.filename] = &e;

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(wav_dir)) {
    if (entry.path().extension() == ".wav") {
      files.push_back(entry.path().filename().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw_data("ingest: no WAV files in " + wav_dir);

  Bank b;
  b.split = "train";
  for (const auto& name : files) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw_data("ingest: manifest has no row for file: " + name);
    }
    const IngestEntry& meta = *it->second;
    wav::WavData w = wav::read_wav16((fs::path(wav_dir) / name).string());

    std::vector<float> x = std::move(w.samples);
    if (w.sample_rate != kSampleRate) {
      // Linear-interpolation resample.
      const double ratio = static_cast<double>(w.sample_rate) / kSampleRate;
      const auto out_len = static_cast<std::size_t>(
          std::floor(static_cast<double>(x.size() - 1) / ratio)) + 1;
      std::vector<float> y(out_len);
      for (std::size_t i = 0; i < out_len; ++i) {
        const double src = static_cast<double>(i) * ratio;
        const auto lo = static_cast<std::size_t>(src);
        const double frac = src - static_cast<double>(lo);
        const float a = x[lo];
        const float c = lo + 1 < x.size() ? x[lo + 1] : x[lo];
        y[i] = static_cast<float>((1.0 - frac) * a + frac * c);
      }
      x = std::move(y);
    }

    // Trim leading/trailing samples below -60 dBFS.
    const float gate = std::pow(10.0f, -60.0f / 20.0f);
    std::size_t begin = 0, end = x.size();
    while (begin < end && std::abs(x[begin]) < gate) ++begin;
    while (end > begin && std::abs(x[end - 1]) < gate) --end;
    if (begin >= end) throw_data("ingest: file is silent after trimming: " + name);
    x = std::vector<float>(x.begin() + static_cast<std::ptrdiff_t>(begin),
                           x.begin() + static_cast<std::ptrdiff_t>(end));

    ElementarySound s;
    s.id = name.substr(0, name.size() - 4);
    s.instrument = meta.instrument;
    s.note = meta.note;
    s.octave = meta.octave;
    s.waveform = std::move(x);
    s.duration_s = static_cast<double>(s.waveform.size()) / kSampleRate;
    annotate(s);
    b.sounds.push_back(std::move(s));
  }

  std::vector<double> brightness, loudness;
  for (const auto& s : b.sounds) {
    brightness.push_back(s.brightness_value);
    loudness.push_back(s.loudness_lufs);
  }
  b.brightness_threshold_hz = median_of(brightness);
  b.loudness_threshold_lufs = median_of(loudness);
  apply_labels(b);
  return b;
}

void save_bank(const Bank& b, const std::string& out_dir) {
  fs::create_directories(fs::path(out_dir) / "sounds");
  json sounds = json::array();
  for (const auto& s : b.sounds) {
    const std::string rel = "sounds/" + s.id + ".wav";
    wav::write_wav16((fs::path(out_dir) / rel).string(), s.waveform,
                     s.sample_rate);
    sounds.push_back({{"id", s.id},
                      {"instrument", s.instrument},
                      {"note", s.note},
                      {"octave", s.octave},
                      {"path", rel},
                      {"duration_s", s.duration_s},
                      {"brightness_value", s.brightness_value},
                      {"brightness_label", s.brightness_label},
                      {"loudness_lufs", s.loudness_lufs},
                      {"loudness_label", s.loudness_label}});
  }
  json doc = {
      {"header",
       {{"split", b.split},
        {"thresholds",
         {{"brightness_hz", b.brightness_threshold_hz},
          {"loudness_lufs", b.loudness_threshold_lufs}}},
        {"master_seed", b.master_seed},
        {"generator_version", kGeneratorVersion}}},
      {"sounds", sounds}};
  std::ofstream f(fs::path(out_dir) / "bank.json", std::ios::trunc);
  if (!f) throw_data("cannot write bank manifest in " + out_dir);
  f << doc.dump(2) << "\n";
}

Bank load_bank(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "bank.json");
  if (!f) throw_data("no bank.json in " + dir);
  json doc = json::parse(f);
  Bank b;
  b.split = doc.at("header").at("split").get<std::string>();
  b.brightness_threshold_hz =
      doc.at("header").at("thresholds").at("brightness_hz").get<double>();
  b.loudness_threshold_lufs =
      doc.at("header").at("thresholds").at("loudness_lufs").get<double>();
  b.master_seed = doc.at("header").at("master_seed").get<std::uint64_t>();
  b.manifest_path = (fs::path(dir) / "bank.json").string();
  for (const auto& j : doc.at("sounds")) {
    ElementarySound s;
    s.id = j.at("id").get<std::string>();
    s.instrument = j.at("instrument").get<std::string>();
    s.note = j.at("note").get<std::string>();
    s.octave = j.at("octave").get<int>();
    s.duration_s = j.at("duration_s").get<double>();
    s.brightness_value = j.at("brightness_value").get<double>();
    s.brightness_label = j.at("brightness_label").get<std::string>();
    s.loudness_lufs = j.at("loudness_lufs").get<double>();
    s.loudness_label = j.at("loudness_label").get<std::string>();
    wav::WavData w =
        wav::read_wav16((fs::path(dir) / j.at("path").get<std::string>()).string());
    s.waveform = std::move(w.samples);
    s.sample_rate = w.sample_rate;
    b.sounds.push_back(std::move(s));
  }
  return b;
}

}  // namespace aqa::bank
