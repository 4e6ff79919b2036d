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

#ifndef AQA_WAV_HPP_
#define AQA_WAV_HPP_

#include <string>
#include <vector>

namespace aqa::wav {

struct WavData {
  std::vector<float> samples;  // mono, -1..1
  int sample_rate = 0;
};

// 16-bit PCM mono. Samples are clamped to [-1, 1] before quantization.
void write_wav16(const std::string& path, const std::vector<float>& samples,
                 int sample_rate);

// Reads 16-bit PCM WAV; multi-channel input is rejected (banks are mono).
WavData read_wav16(const std::string& path);

}  // namespace aqa::wav

#endif  // AQA_WAV_HPP_
