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

#include "aqa/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "aqa/common.hpp"

using nlohmann::json;

namespace aqa::scene {

std::string global_bucket(double onset_s, double scene_duration_s) {
  if (onset_s < 0.0 || onset_s >= scene_duration_s) {
    throw_data("global_bucket: onset outside scene");
  }
  const int third = std::min(2, static_cast<int>(3.0 * onset_s / scene_duration_s));
  static const char* names[3] = {"beginning", "middle", "end"};
  return names[third];
}

namespace {

// Lays out onsets, positions, and buckets from durations and gaps.
void derive_layout(SceneSpec& spec) {
  if (spec.silence_gaps_s.size() != spec.events.size() + 1) {
    throw_data("scene needs events+1 silence gaps");
  }
  double total = 0.0;
  for (double g : spec.silence_gaps_s) total += g;
  for (const auto& e : spec.events) total += e.duration_s;
  spec.total_duration_s = total;
  double cursor = 0.0;
  for (std::size_t i = 0; i < spec.events.size(); ++i) {
    cursor += spec.silence_gaps_s[i];
    spec.events[i].onset_s = cursor;
    spec.events[i].absolute_position = static_cast<int>(i) + 1;
    cursor += spec.events[i].duration_s;
  }
  for (auto& e : spec.events) {
    e.global_position = global_bucket(e.onset_s, spec.total_duration_s);
  }
}

}  // namespace

SceneSpec compose_scene(const bank::Bank& b, std::uint64_t seed) {
  if (b.sounds.empty()) throw_data("compose_scene: empty bank");
  Pcg32 rng(derive_seed(seed, "scene-compose"));

  int n = static_cast<int>(rng.uniform_int(kMinEvents, kMaxEvents));
  const auto bank_size = static_cast<std::int64_t>(b.sounds.size());

  for (int attempt = 0;; ++attempt) {
    // With replacement across the bank, but never the same id twice in a row.
    std::vector<const bank::ElementarySound*> picked;
    picked.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const bank::ElementarySound* s = nullptr;
      do {
        s = &b.sounds[static_cast<std::size_t>(rng.uniform_int(0, bank_size - 1))];
      } while (!picked.empty() && s->id == picked.back()->id);
      picked.push_back(s);
    }
    double dur_sum = 0.0;
    for (const auto* s : picked) dur_sum += s->duration_s;
    const double min_gaps = static_cast<double>(n + 1) * kMinGap;
    if (dur_sum + min_gaps > kMaxSceneDuration) {
      // Durations alone blow the cap; retry, shrinking the scene if the draw
      // keeps failing.
      if (attempt > 0 && attempt % 8 == 0 && n > kMinEvents) --n;
      continue;
    }

    std::vector<double> extra(static_cast<std::size_t>(n) + 1);
    double extra_sum = 0.0;
    for (auto& g : extra) {
      g = rng.uniform(0.0, kMaxGap - kMinGap);
      extra_sum += g;
    }
    const double headroom = kMaxSceneDuration - dur_sum - min_gaps;
    const double lambda = extra_sum > headroom ? headroom / extra_sum : 1.0;

    SceneSpec spec;
    spec.silence_gaps_s.resize(extra.size());
    for (std::size_t i = 0; i < extra.size(); ++i) {
      spec.silence_gaps_s[i] = kMinGap + lambda * extra[i];
    }
    for (const auto* s : picked) {
      SoundEvent e;
      e.sound_id = s->id;
      e.instrument = s->instrument;
      e.note = s->note;
      e.brightness_label = s->brightness_label;
      e.loudness_label = s->loudness_label;
      e.duration_s = s->duration_s;
      spec.events.push_back(std::move(e));
    }
    spec.split = b.split;
    spec.reverb.rt60_s = rng.uniform(0.1, 0.6);
    spec.reverb.ir_length_s = spec.reverb.rt60_s;
    spec.reverb.wet_dry = rng.uniform(0.2, 0.5);
    spec.reverb.seed = rng.next_u64();
    spec.noise_snr_db = rng.uniform(20.0, 40.0);
    derive_layout(spec);
    return spec;
  }
}

std::vector<float> render_scene(const SceneSpec& spec, const bank::Bank& b) {
  const int sr = bank::kSampleRate;
  const auto total_samples =
      static_cast<std::size_t>(std::lround(spec.total_duration_s * sr));
  std::vector<float> mix(total_samples, 0.0f);
  for (const auto& e : spec.events) {
    const bank::ElementarySound* s = b.find(e.sound_id);
    if (s == nullptr) throw_data("render_scene: unknown sound id: " + e.sound_id);
    const auto start = static_cast<std::size_t>(std::lround(e.onset_s * sr));
    for (std::size_t i = 0; i < s->waveform.size() && start + i < mix.size(); ++i) {
      mix[start + i] = s->waveform[i];
    }
  }
  std::vector<float> out = dsp::apply_reverb(mix, spec.reverb, sr);
  out = dsp::add_uniform_noise(out, spec.noise_snr_db,
                               derive_seed(spec.reverb.seed, "scene-noise"));
  return out;
}

SceneSpec permute_events(const SceneSpec& spec, std::uint64_t seed) {
  SceneSpec out = spec;
  Pcg32 rng(derive_seed(seed, "scene-permute"));
  for (std::size_t i = out.events.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(out.events[i], out.events[j]);
  }
  derive_layout(out);
  return out;
}

std::string scene_to_json(const SceneSpec& spec) {
  json events = json::array();
  for (const auto& e : spec.events) {
    events.push_back({{"sound_id", e.sound_id},
                      {"instrument", e.instrument},
                      {"note", e.note},
                      {"brightness_label", e.brightness_label},
                      {"loudness_label", e.loudness_label},
                      {"duration_s", e.duration_s},
                      {"onset_s", e.onset_s},
                      {"absolute_position", e.absolute_position},
                      {"global_position", e.global_position}});
  }
  json doc = {{"scene_id", spec.scene_id},
              {"split", spec.split},
              {"events", events},
              {"silence_gaps_s", spec.silence_gaps_s},
              {"reverb",
               {{"rt60_s", spec.reverb.rt60_s},
                {"ir_length_s", spec.reverb.ir_length_s},
                {"wet_dry", spec.reverb.wet_dry},
                {"seed", spec.reverb.seed}}},
              {"noise_snr_db", spec.noise_snr_db},
              {"total_duration_s", spec.total_duration_s},
              {"audio_path", spec.audio_path}};
  return doc.dump(2);
}

SceneSpec scene_from_json(const std::string& text) {
  json doc = json::parse(text);
  SceneSpec spec;
  spec.scene_id = doc.at("scene_id").get<std::string>();
  spec.split = doc.at("split").get<std::string>();
  for (const auto& j : doc.at("events")) {
    SoundEvent e;
    e.sound_id = j.at("sound_id").get<std::string>();
    e.instrument = j.at("instrument").get<std::string>();
    e.note = j.at("note").get<std::string>();
    e.brightness_label = j.at("brightness_label").get<std::string>();
    e.loudness_label = j.at("loudness_label").get<std::string>();
    e.duration_s = j.at("duration_s").get<double>();
    e.onset_s = j.at("onset_s").get<double>();
    e.absolute_position = j.at("absolute_position").get<int>();
    e.global_position = j.at("global_position").get<std::string>();
    spec.events.push_back(std::move(e));
  }
  spec.silence_gaps_s = doc.at("silence_gaps_s").get<std::vector<double>>();
  spec.reverb.rt60_s = doc.at("reverb").at("rt60_s").get<double>();
  spec.reverb.ir_length_s = doc.at("reverb").at("ir_length_s").get<double>();
  spec.reverb.wet_dry = doc.at("reverb").at("wet_dry").get<double>();
  spec.reverb.seed = doc.at("reverb").at("seed").get<std::uint64_t>();
  spec.noise_snr_db = doc.at("noise_snr_db").get<double>();
  spec.total_duration_s = doc.at("total_duration_s").get<double>();
  spec.audio_path = doc.at("audio_path").get<std::string>();
  return spec;
}

void save_scene(const SceneSpec& spec, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw_data("cannot write scene file: " + path);
  f << scene_to_json(spec) << "\n";
}

SceneSpec load_scene(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw_data("cannot open scene file: " + path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return scene_from_json(text);
}

}  // namespace aqa::scene
