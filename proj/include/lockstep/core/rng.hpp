// Copyright 2026 The Lockstep Authors
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

#ifndef LOCKSTEP_CORE_RNG_HPP_
#define LOCKSTEP_CORE_RNG_HPP_

// Counter-based random streams. A stream is addressed by (seed, purpose,
// world) and advances its own draw counter, so the values a world sees never
// depend on how many worlds exist or how they are partitioned across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace lockstep {

// Philox4x32-10 (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

// FNV-1a, used to turn purpose strings into stream ids.
constexpr std::uint64_t fnv1a64(std::string_view s,
                                std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t world)
      : world_(world) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(purpose));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  std::uint64_t next_u64() {
    const auto out = philox4x32(
        {static_cast<std::uint32_t>(counter_),
         static_cast<std::uint32_t>(counter_ >> 32),
         static_cast<std::uint32_t>(world_),
         static_cast<std::uint32_t>(world_ >> 32)},
        key_);
    ++counter_;
    return (std::uint64_t{out[0]} << 32) | out[1];
  }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  // Box-Muller; one normal per two uniforms, no cached spare.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t world_ = 0;
  std::uint64_t counter_ = 0;
};

// One stream per world for a single purpose. `world_offset` is the global id
// of local world 0, so a sub-batch reproduces the draws of the full batch.
class WorldStreams {
 public:
  WorldStreams() = default;
  WorldStreams(std::uint64_t seed, std::string_view purpose, std::size_t n_worlds,
               std::uint64_t world_offset = 0) {
    const std::uint64_t id = fnv1a64(purpose);
    streams_.reserve(n_worlds);
    for (std::size_t w = 0; w < n_worlds; ++w) {
      streams_.emplace_back(seed, id, world_offset + w);
    }
  }

  RngStream& operator[](std::size_t w) { return streams_[w]; }
  std::size_t size() const { return streams_.size(); }

 private:
  std::vector<RngStream> streams_;
};

}  // namespace lockstep

#endif  // LOCKSTEP_CORE_RNG_HPP_
