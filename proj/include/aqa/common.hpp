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

#ifndef AQA_COMMON_HPP_
#define AQA_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aqa {

// Error taxonomy shared with the CLI exit codes:
// 2 usage, 3 data, 4 numeric failure, 5 incompatibility.
enum class ErrorKind : int {
  kUsage = 2,
  kData = 3,
  kNumeric = 4,
  kIncompat = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& msg) {
  throw Error(ErrorKind::kUsage, msg);
}
[[noreturn]] inline void throw_data(const std::string& msg) {
  throw Error(ErrorKind::kData, msg);
}
[[noreturn]] inline void throw_numeric(const std::string& msg) {
  throw Error(ErrorKind::kNumeric, msg);
}
[[noreturn]] inline void throw_incompat(const std::string& msg) {
  throw Error(ErrorKind::kIncompat, msg);
}

// FNV-1a, used for seed derivation and provenance hashes (not cryptographic).
constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t x, std::uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (x >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
  return h;
}

// Derives a child seed from a parent seed and a context label, so that
// independent sampling streams never alias.
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) {
  return fnv1a64(label, fnv1a64_u64(parent, kFnvOffset));
}
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view label,
                                 std::uint64_t index) {
  return fnv1a64_u64(index, derive_seed(parent, label));
}

// PCG32 (Melissa O'Neill, pcg-random.org, minimal variant). Chosen over
// std::mt19937 because its output sequence is fully pinned by this header,
// independent of the standard library implementation.
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0xda3e39cb94b95bdbull) {
    state_ = 0;
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ull + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % span);
  }

  // Box-Muller; consumes two uniforms per call, no cached state.
  double gaussian() {
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

}  // namespace aqa

#endif  // AQA_COMMON_HPP_
