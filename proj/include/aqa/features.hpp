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

#ifndef AQA_FEATURES_HPP_
#define AQA_FEATURES_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace aqa::feat {

struct MelParams {
  int sample_rate = 48000;
  int window = 512;   // Hann window and FFT size
  int hop = 2048;     // larger than the window: frames sample sparsely
  int n_mels = 64;
  double fmin_hz = 20.0;
  double fmax_hz = 24000.0;
  int target_frames = 418;  // padded/resized time extent
};

struct Spectrogram {
  int n_mels = 0;
  int n_frames = 0;      // current time extent (may be padded)
  int valid_frames = 0;  // frames computed from real audio
  std::string scene_id;
  std::vector<float> data;  // row-major [n_mels][n_frames], log power

  float& at(int mel, int frame) {
    return data[static_cast<std::size_t>(mel) * static_cast<std::size_t>(n_frames) +
                static_cast<std::size_t>(frame)];
  }
  float at(int mel, int frame) const {
    return data[static_cast<std::size_t>(mel) * static_cast<std::size_t>(n_frames) +
                static_cast<std::size_t>(frame)];
  }
};

struct NormStats {
  double mean = 0.0;
  double std_dev = 1.0;
  std::string computed_over;  // split id
};

// Number of frames the framing law yields for a waveform of n samples.
int frame_count(std::size_t n_samples, const MelParams& p);

// Triangular HTK-mel filterbank; row-major [n_mels][window/2 + 1].
std::vector<double> mel_filterbank(const MelParams& p);

// Hann-windowed power spectra projected through the Mel bank, log(p + 1e-10).
// Throws when the waveform is shorter than one window.
Spectrogram melspec(const std::vector<float>& waveform, const MelParams& p);

// Right-pads with zero columns up to target_frames; errors if already wider.
Spectrogram pad_to(const Spectrogram& spec, int target_frames);

// Bilinear (linear along time) resize onto target_frames columns.
Spectrogram resize_bilinear(const Spectrogram& spec, int target_frames);

// Two-pass global mean/std over the valid frames of the train split.
NormStats fit_norm(const std::vector<const Spectrogram*>& train_specs);

// (x - mean)/std over valid frames; padded columns stay exactly zero.
Spectrogram normalize(const Spectrogram& spec, const NormStats& stats);

// Feature file: "AQAF" magic, u32 version/n_mels/n_frames/valid_frames
// little-endian, then row-major f32 data.
void save_aqaf(const Spectrogram& spec, const std::string& path);
Spectrogram load_aqaf(const std::string& path);

void save_norm_stats(const NormStats& stats, const std::string& path);
NormStats load_norm_stats(const std::string& path);

}  // namespace aqa::feat

#endif  // AQA_FEATURES_HPP_
