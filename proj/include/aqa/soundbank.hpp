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

#ifndef AQA_SOUNDBANK_HPP_
#define AQA_SOUNDBANK_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aqa::bank {

constexpr int kSampleRate = 48000;
constexpr int kBankSize = 135;
constexpr double kMinDuration = 0.69;
constexpr double kMaxDuration = 1.11;

extern const std::array<std::string, 6> kInstruments;
extern const std::array<std::string, 12> kNotes;  // A .. G# (chromatic labels)
constexpr std::array<int, 3> kOctaves = {3, 4, 5};

struct Envelope {
  double attack_s;
  double decay_s;
  double sustain_level;  // 0..1
  double release_s;
};

struct Timbre {
  std::string instrument_name;
  std::vector<double> harmonic_amplitudes;  // first entry = fundamental
  Envelope envelope;
  double vibrato_rate_hz;
  double vibrato_depth_cents;
};

// The six hand-designed profiles standing in for real recordings.
const Timbre& timbre_for(const std::string& instrument);

struct ElementarySound {
  std::string id;
  std::string instrument;
  std::string note;
  int octave = 4;
  std::vector<float> waveform;
  int sample_rate = kSampleRate;
  double duration_s = 0.0;
  double brightness_value = 0.0;  // spectral centroid, Hz
  std::string brightness_label;   // bright | dark
  double loudness_lufs = 0.0;
  std::string loudness_label;  // loud | quiet
};

struct Bank {
  std::string split;  // train | test
  std::vector<ElementarySound> sounds;
  double brightness_threshold_hz = 0.0;
  double loudness_threshold_lufs = 0.0;
  std::uint64_t master_seed = 0;
  std::string manifest_path;

  const ElementarySound* find(const std::string& id) const;
};

// 12-TET with A4 = 440 Hz. Throws Error(kData) on an unknown note label.
double note_to_frequency(const std::string& note, int octave);

// Additive synthesis; the seed perturbs detune (+-10 cents), per-harmonic
// gain (+-2 dB) and envelope timing (+-10%). Output is peak-normalized
// to 0.9. Throws when the duration cannot carry attack+release.
std::vector<float> synth_note(const Timbre& timbre, const std::string& note,
                              int octave, double duration_s,
                              std::uint64_t variation_seed);

// Deterministically selects 135 of the 216 (instrument, note, octave)
// combinations with full coverage of every instrument, note, and octave,
// synthesizes each with a split-specific seed, and annotates brightness and
// loudness. Thresholds are the train-bank medians for both splits.
Bank build_bank(const std::string& split, std::uint64_t master_seed);

struct IngestEntry {
  std::string filename;
  std::string instrument;
  std::string note;
  int octave;
};

// Builds a bank from real recordings: resamples to 48 kHz (linear), trims
// silence below -60 dBFS, annotates. A WAV without a manifest row fails the
// whole ingestion (no partial bank).
Bank ingest_wav_dir(const std::string& wav_dir,
                    const std::vector<IngestEntry>& manifest);

// Manifest JSON (header object + sound array) and per-sound WAVs.
void save_bank(const Bank& b, const std::string& out_dir);
Bank load_bank(const std::string& dir);

}  // namespace aqa::bank

#endif  // AQA_SOUNDBANK_HPP_
