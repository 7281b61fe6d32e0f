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

#ifndef RL_LAB_COMMON_EPISODE_H_
#define RL_LAB_COMMON_EPISODE_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rl_lab/common/random.h"

#include "rl_lab/diffsim/env.h"
#include "rl_lab/nets/policy.h"

namespace rl_lab {

struct EpisodeOutcome {
  double total_reward = 0.0;  // undiscounted
  int steps = 0;
  bool failed = false;  // integration went non-finite; total is partial
};

template <std::size_t N>
std::array<double, N> ClipAction(std::span<const double> raw) {
  std::array<double, N> a{};
  for (std::size_t j = 0; j < N; ++j) a[j] = std::clamp(raw[j], -1.0, 1.0);
  return a;
}

// One full-horizon episode driven by the deterministic (mean) action.
// perturb(step, action) may rewrite the action in place before it is
// clipped and applied; it sees the raw mean output.
template <diffsim::DifferentiableEnv Env, class Perturb>
EpisodeOutcome RunMeanEpisode(const Env& env, const diffsim::EnvParams& params,
                              const nets::PolicyNet& policy,
                              std::uint64_t init_seed, Perturb&& perturb) {
  EpisodeOutcome out;
  diffsim::EnvState s = env.Reset(init_seed, params);
  for (int t = 0; t < params.horizon; ++t) {
    const typename Env::Observation obs = env.Observe(s);
    std::vector<double> action = policy.Mean(obs);
    perturb(t, std::span<double>(action));
    const typename Env::Action a = ClipAction<Env::kActDim>(action);
    try {
      auto res = env.Step(s, a, params);
      out.total_reward += res.reward;
      s = res.next;
    } catch (const diffsim::NonFiniteState&) {
      out.failed = true;
      break;
    }
    ++out.steps;
  }
  return out;
}

template <diffsim::DifferentiableEnv Env>
EpisodeOutcome RunMeanEpisode(const Env& env, const diffsim::EnvParams& params,
                              const nets::PolicyNet& policy,
                              std::uint64_t init_seed) {
  return RunMeanEpisode(env, params, policy, init_seed,
                        [](int, std::span<double>) {});
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

inline MeanStd ComputeMeanStd(std::span<const double> xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(xs.size()));
  return r;
}

// Initial-state seed of evaluation rollout r.  Seed 0 is the clean
// evaluation shared by every trainer, so all algorithms and runs are scored
// on the same initial states.
inline std::uint64_t EvalInitSeed(std::uint64_t seed, int rollout) {
  return StreamSeed({kTagEval, seed, static_cast<std::uint64_t>(rollout)});
}

template <diffsim::DifferentiableEnv Env>
MeanStd EvaluateClean(const Env& env, const diffsim::EnvParams& params,
                      const nets::PolicyNet& policy, int rollouts,
                      std::uint64_t seed = 0) {
  std::vector<double> rewards(rollouts);
  for (int r = 0; r < rollouts; ++r) {
    rewards[r] =
        RunMeanEpisode(env, params, policy, EvalInitSeed(seed, r)).total_reward;
  }
  return ComputeMeanStd(rewards);
}

class TrainingAborted : public std::runtime_error {
 public:
  explicit TrainingAborted(const std::string& what)
      : std::runtime_error(what) {}
};

// more non-finite lane resets than this in one update aborts training
inline constexpr int kMaxLaneFailuresPerUpdate = 10;

// One row of a learning curve.  For evaluation columns the values are those
// of the most recent evaluation.
struct CurveRow {
  int episode = 0;
  std::int64_t env_steps = 0;
  double eval_reward_mean = 0.0;
  double eval_reward_std = 0.0;
  double policy_loss = 0.0;
  double critic_loss = 0.0;
  std::int64_t grad_evals = 0;
  double update_wall_ms = 0.0;
};

}  // namespace rl_lab

#endif  // RL_LAB_COMMON_EPISODE_H_
