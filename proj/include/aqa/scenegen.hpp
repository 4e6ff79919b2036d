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

#ifndef AQA_SCENEGEN_HPP_
#define AQA_SCENEGEN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "aqa/dsp.hpp"
#include "aqa/soundbank.hpp"

namespace aqa::scene {

constexpr int kMinEvents = 5;
constexpr int kMaxEvents = 15;
constexpr double kMaxSceneDuration = 17.82;
constexpr double kMinGap = 0.1;
constexpr double kMaxGap = 0.5;

struct SoundEvent {
  std::string sound_id;
  std::string instrument;
  std::string note;
  std::string brightness_label;
  std::string loudness_label;
  double duration_s = 0.0;
  double onset_s = 0.0;
  int absolute_position = 0;        // 1-based scene order
  std::string global_position;      // beginning | middle | end
};

struct SceneSpec {
  std::string scene_id;
  std::string split;
  std::vector<SoundEvent> events;
  std::vector<double> silence_gaps_s;  // events.size() + 1 entries
  dsp::ReverbParams reverb;
  double noise_snr_db = 30.0;
  double total_duration_s = 0.0;
  std::string audio_path;
};

// Temporal third of the scene an onset falls in.
std::string global_bucket(double onset_s, double scene_duration_s);

// Draws n in {5..15} sounds (no immediate id repetition), n+1 gaps in
// [0.1, 0.5] s (shrunk toward 0.1 if the 17.82 s cap binds), and per-scene
// corruption parameters.
SceneSpec compose_scene(const bank::Bank& b, std::uint64_t seed);

// Concatenates bank waveforms at the spec onsets, applies reverb then noise.
// Length is round(total_duration_s * 48000) samples.
std::vector<float> render_scene(const SceneSpec& spec, const bank::Bank& b);

// Same events in a different temporal order; onsets, positions, and global
// buckets are rederived. Used by the ill-posed-question filter.
SceneSpec permute_events(const SceneSpec& spec, std::uint64_t seed);

std::string scene_to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const std::string& text);

void save_scene(const SceneSpec& spec, const std::string& path);
SceneSpec load_scene(const std::string& path);

}  // namespace aqa::scene

#endif  // AQA_SCENEGEN_HPP_
