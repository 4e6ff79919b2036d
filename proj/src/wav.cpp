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

#include "aqa/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "aqa/common.hpp"

namespace aqa::wav {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;  // little-endian host assumed (x86/arm64)
}
std::uint16_t get_u16(const char* p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

}  // namespace

void write_wav16(const std::string& path, const std::vector<float>& samples,
                 int sample_rate) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::string buf;
  buf.reserve(44 + data_bytes);
  buf.append("RIFF");
  put_u32(buf, 36 + data_bytes);
  buf.append("WAVE");
  buf.append("fmt ");
  put_u32(buf, 16);
  put_u16(buf, 1);  // PCM
  put_u16(buf, 1);  // mono
  put_u32(buf, static_cast<std::uint32_t>(sample_rate));
  put_u32(buf, static_cast<std::uint32_t>(sample_rate * 2));
  put_u16(buf, 2);   // block align
  put_u16(buf, 16);  // bits per sample
  buf.append("data");
  put_u32(buf, data_bytes);
  for (float s : samples) {
    float c = std::clamp(s, -1.0f, 1.0f);
    auto q = static_cast<std::int16_t>(std::lrintf(c * 32767.0f));
    put_u16(buf, static_cast<std::uint16_t>(q));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw_data("cannot open for writing: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw_data("short write: " + path);
}

WavData read_wav16(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw_data("cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 44 || buf.compare(0, 4, "RIFF") != 0 ||
      buf.compare(8, 4, "WAVE") != 0) {
    throw_data("not a RIFF/WAVE file: " + path);
  }
  // Walk chunks; fmt must precede data.
  std::size_t pos = 12;
  int channels = 0, rate = 0, bits = 0;
  WavData out;
  bool have_fmt = false, have_data = false;
  while (pos + 8 <= buf.size()) {
    std::string id = buf.substr(pos, 4);
    std::uint32_t len = get_u32(buf.data() + pos + 4);
    std::size_t body = pos + 8;
    if (body + len > buf.size()) throw_data("truncated chunk in " + path);
    if (id == "fmt ") {
      if (len < 16) throw_data("bad fmt chunk in " + path);
      std::uint16_t format = get_u16(buf.data() + body);
      channels = get_u16(buf.data() + body + 2);
      rate = static_cast<int>(get_u32(buf.data() + body + 4));
      bits = get_u16(buf.data() + body + 14);
      if (format != 1) throw_data("unsupported WAV codec (want PCM): " + path);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw_data("data chunk before fmt in " + path);
      if (bits != 16) throw_data("unsupported bit depth (want 16): " + path);
      if (channels != 1) throw_data("multi-channel WAV not supported: " + path);
      std::size_t n = len / 2;
      out.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::int16_t q;
        std::memcpy(&q, buf.data() + body + 2 * i, 2);
        out.samples[i] = static_cast<float>(q) / 32767.0f;
      }
      have_data = true;
    }
    pos = body + len + (len & 1);
  }
  if (!have_data) throw_data("no data chunk in " + path);
  out.sample_rate = rate;
  return out;
}

}  // namespace aqa::wav
