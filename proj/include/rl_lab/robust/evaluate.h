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

#ifndef RL_LAB_ROBUST_EVALUATE_H_
#define RL_LAB_ROBUST_EVALUATE_H_

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rl_lab/common/episode.h"
#include "rl_lab/common/random.h"
#include "rl_lab/diffsim/env.h"
#include "rl_lab/nets/policy.h"
#include "rl_lab/robust/noise.h"

namespace rl_lab::robust {

// One robustness measurement.  The per-rollout rewards are kept so the
// statistics can be recomputed.
struct EvalRecord {
  std::string algorithm;
  std::uint64_t policy_seed = 0;
  NoiseSpec noise;
  diffsim::EnvParams params;
  double mean_reward = 0.0;
  double std_reward = 0.0;  // population
  int rollouts = 0;
  int failures = 0;  // episodes cut short by a non-finite state
  std::vector<double> rewards;
};

// Noise stream of one evaluation rollout.  It depends on the policy's slot
// within its algorithm, not on the algorithm, so policy k of every
// algorithm sees the same noise realization.
inline Rng NoiseStream(std::uint64_t rng_seed, int slot, int rollout) {
  return MakeRng({kTagNoise, rng_seed, static_cast<std::uint64_t>(slot),
                  static_cast<std::uint64_t>(rollout)});
}

// Full-horizon rollouts of the mean action with noise injected each step.
// Rollout r starts from EvalInitSeed(seed, r).  A non-finite state keeps
// the partial return and counts as a failure.
template <diffsim::DifferentiableEnv Env>
EvalRecord EvalPolicy(const Env& env, const diffsim::EnvParams& params,
                      const nets::PolicyNet& policy, const NoiseSpec& noise,
                      int rollouts, std::uint64_t seed, int slot = 0) {
  ValidateNoise(noise);
  diffsim::ValidateParams(params);
  if (rollouts < 1) throw std::invalid_argument("rollouts must be >= 1");
  EvalRecord rec;
  rec.noise = noise;
  rec.params = params;
  rec.rollouts = rollouts;
  rec.rewards.resize(rollouts);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<double> draw(Env::kActDim);
  for (int r = 0; r < rollouts; ++r) {
    Rng rng = NoiseStream(noise.rng_seed, slot, r);
    const EpisodeOutcome out = RunMeanEpisode(
        env, params, policy, EvalInitSeed(seed, r),
        [&](int, std::span<double> action) {
          for (double& d : draw) d = uniform(rng);
          for (std::size_t j = 0; j < action.size(); ++j) {
            action[j] = InjectNoise(action[j], noise.lambda_mix, draw[j]);
          }
        });
    rec.rewards[r] = out.total_reward;
    if (out.failed) ++rec.failures;
  }
  const MeanStd ms = ComputeMeanStd(rec.rewards);
  rec.mean_reward = ms.mean;
  rec.std_reward = ms.std;
  return rec;
}

}  // namespace rl_lab::robust

#endif  // RL_LAB_ROBUST_EVALUATE_H_
