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

#ifndef RL_LAB_ROBUST_NOISE_H_
#define RL_LAB_ROBUST_NOISE_H_

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rl_lab::robust {

struct NoiseSpec {
  double lambda_mix = 0.0;  // 0 = no noise, 1 = action fully replaced
  std::uint64_t rng_seed = 0;
};

inline void ValidateNoise(const NoiseSpec& spec) {
  if (!(spec.lambda_mix >= 0.0 && spec.lambda_mix <= 1.0)) {
    throw std::invalid_argument("lambda_mix must lie in [0, 1]");
  }
}

// a' = (1 - lambda) clip(a, -1, 1) + lambda n,  n ~ U(-1, 1).
// The final clamp only absorbs rounding; the convex combination of two
// values in [-1, 1] already lies in [-1, 1].
inline double InjectNoise(double a, double lambda, double draw) {
  const double clipped = std::clamp(a, -1.0, 1.0);
  return std::clamp((1.0 - lambda) * clipped + lambda * draw, -1.0, 1.0);
}

inline std::vector<double> InjectNoise(std::span<const double> a,
                                       double lambda,
                                       std::span<const double> draw) {
  if (a.size() != draw.size()) {
    throw std::invalid_argument("inject_noise: dimension mismatch");
  }
  std::vector<double> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    out[j] = InjectNoise(a[j], lambda, draw[j]);
  }
  return out;
}

}  // namespace rl_lab::robust

#endif  // RL_LAB_ROBUST_NOISE_H_
