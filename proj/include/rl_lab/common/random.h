// Copyright 2026 The rl_lab Authors
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

#ifndef RL_LAB_COMMON_RANDOM_H_
#define RL_LAB_COMMON_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rl_lab {

// finalizer from splitmix64
constexpr std::uint64_t MixBits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based seed derivation: every tuple of keys names an independent
// stream, so (run, lane, reset) or (policy, rollout) draws never depend on the
// order in which other streams were consumed.
constexpr std::uint64_t StreamSeed(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t k : keys) h = MixBits(h ^ MixBits(k));
  return h;
}

using Rng = std::mt19937_64;

inline Rng MakeRng(std::initializer_list<std::uint64_t> keys) {
  return Rng(StreamSeed(keys));
}

// stream tags
inline constexpr std::uint64_t kTagInit = 0x1;
inline constexpr std::uint64_t kTagLane = 0x2;
inline constexpr std::uint64_t kTagReset = 0x3;
inline constexpr std::uint64_t kTagEval = 0x4;
inline constexpr std::uint64_t kTagNoise = 0x5;
inline constexpr std::uint64_t kTagShuffle = 0x6;

}  // namespace rl_lab

#endif  // RL_LAB_COMMON_RANDOM_H_
