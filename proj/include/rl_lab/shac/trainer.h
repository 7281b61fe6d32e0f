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

#ifndef RL_LAB_SHAC_TRAINER_H_
#define RL_LAB_SHAC_TRAINER_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rl_lab/common/episode.h"
#include "rl_lab/common/random.h"
#include "rl_lab/diffsim/env.h"
#include "rl_lab/nets/policy.h"
#include "rl_lab/optim/adam.h"
#include "rl_lab/optim/asam.h"
#include "rl_lab/shac/losses.h"
#include "rl_lab/shac/rollout.h"

namespace rl_lab::shac {

enum class Mode { kPlain, kAsam };

struct ShacConfig {
  int num_envs = 32;       // N
  int horizon = 16;        // h
  double gamma = 0.99;
  double td_lambda = 0.95;
  double target_alpha = 0.95;
  double actor_lr = 2e-3;
  double actor_lr_final = 1e-4;  // linear decay over the run
  double critic_lr = 2e-3;
  int critic_epochs = 16;
  int episodes = 500;      // M
  double max_grad_norm = 1.0;
  Mode mode = Mode::kPlain;
  optim::AsamConfig asam;
  int eval_interval = 5;   // episodes between evaluations
  int eval_rollouts = 8;
  std::vector<int> hidden = nets::kDefaultHidden;
};

inline void Validate(const ShacConfig& c, const diffsim::EnvParams& p) {
  if (c.num_envs < 1) throw std::invalid_argument("num_envs must be >= 1");
  if (c.horizon < 1 || c.horizon > p.horizon) {
    throw std::invalid_argument("horizon must lie in [1, episode horizon]");
  }
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1]");
  }
  if (!(c.td_lambda >= 0.0 && c.td_lambda <= 1.0)) {
    throw std::invalid_argument("td_lambda must lie in [0, 1]");
  }
  if (!(c.target_alpha >= 0.0 && c.target_alpha <= 1.0)) {
    throw std::invalid_argument("target_alpha must lie in [0, 1]");
  }
  if (c.episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (c.critic_epochs < 0) {
    throw std::invalid_argument("critic_epochs must be >= 0");
  }
  if (c.eval_interval < 1 || c.eval_rollouts < 1) {
    throw std::invalid_argument("eval interval/rollouts must be >= 1");
  }
  if (c.mode == Mode::kAsam) optim::ValidateAsam(c.asam);
}

inline double LinearSchedule(double start, double end, int episode,
                             int episodes) {
  if (episodes <= 1) return start;
  const double frac = static_cast<double>(episode - 1) / (episodes - 1);
  return start + (end - start) * frac;
}

// Short-horizon actor-critic, optionally with the sharpness-aware actor
// update.
template <diffsim::DifferentiableEnv Env>
class ShacTrainer {
 public:
  ShacTrainer(Env env, diffsim::EnvParams params, ShacConfig cfg,
              std::uint64_t seed)
      : env_(std::move(env)),
        params_(params),
        cfg_(std::move(cfg)),
        seed_(seed),
        policy_(Env::kObsDim, Env::kActDim, cfg_.hidden),
        critic_(Env::kObsDim, cfg_.hidden) {
    diffsim::ValidateParams(params_);
    Validate(cfg_, params_);
    policy_.Initialize(seed_);
    critic_.Initialize(seed_);
    target_critic_ = critic_;
    actor_opt_ = optim::Adam(policy_.params(), cfg_.actor_lr);
    critic_opt_ = optim::Adam(critic_.params(), cfg_.critic_lr);
    lanes_ = InitLanes(env_, params_, seed_, cfg_.num_envs);
  }

  const nets::PolicyNet& policy() const { return policy_; }
  const nets::CriticNet& critic() const { return critic_; }
  const nets::CriticNet& target_critic() const { return target_critic_; }
  const ShacConfig& config() const { return cfg_; }
  int episode() const { return episode_; }
  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t grad_evals() const { return grad_evals_; }

  // One learning episode: rollout, actor update, TD(lambda) targets, critic
  // fit, target mixing.
  CurveRow TrainEpisode() {
    ++episode_;
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();

    actor_opt_.set_lr(LinearSchedule(cfg_.actor_lr, cfg_.actor_lr_final,
                                     episode_, cfg_.episodes));
    HorizonBatch<Env> batch =
        Rollout(env_, params_, policy_, lanes_, cfg_.horizon);
    env_steps_ += batch.env_steps();
    if (batch.lane_failures > 0) {
      std::clog << "[shac] episode " << episode_ << ": "
                << batch.lane_failures << " lane(s) reset after non-finite "
                << "state\n";
    }
    if (batch.lane_failures > kMaxLaneFailuresPerUpdate) {
      throw TrainingAborted("more than " +
                            std::to_string(kMaxLaneFailuresPerUpdate) +
                            " non-finite lane resets in episode " +
                            std::to_string(episode_));
    }

    PolicyObjective<Env> objective(env_, batch, target_critic_, cfg_.gamma);
    ParamVector grad = objective.Gradient(policy_, batch.policy_tapes);
    ++grad_evals_;
    optim::ClipGradNorm(grad, cfg_.max_grad_norm);

    if (cfg_.mode == Mode::kPlain) {
      actor_opt_.Step(policy_.params(), grad);
    } else {
      const optim::Perturbation pert =
          optim::AsamPerturb(policy_.params(), grad, cfg_.asam);
      if (pert.degenerate) ++degenerate_steps_;
      nets::PolicyNet perturbed = policy_;
      perturbed.params() += pert.epsilon;
      const std::vector<nets::PolicyTape> tapes = objective.Replay(perturbed);
      ParamVector grad_pert = objective.Gradient(perturbed, tapes);
      ++grad_evals_;
      optim::ClipGradNorm(grad_pert, cfg_.max_grad_norm);
      optim::AsamUpdate(policy_.params(), grad_pert, actor_opt_, cfg_.asam);
    }
    const auto t1 = Clock::now();

    const std::vector<double> targets = TdLambdaTargets(
        env_, batch, target_critic_, cfg_.gamma, cfg_.td_lambda);
    std::vector<double> obs;
    obs.reserve(batch.steps.size() * Env::kObsDim);
    for (const Transition<Env>& tr : batch.steps) {
      obs.insert(obs.end(), tr.obs.begin(), tr.obs.end());
    }
    const double critic_loss = FitCritic(critic_, critic_opt_, obs,
                                         Env::kObsDim, targets,
                                         cfg_.critic_epochs);
    TargetMix(target_critic_, critic_, cfg_.target_alpha);

    if (episode_ % cfg_.eval_interval == 0 || episode_ == cfg_.episodes ||
        episode_ == 1) {
      last_eval_ = EvaluateClean(env_, params_, policy_, cfg_.eval_rollouts);
    }

    CurveRow row;
    row.episode = episode_;
    row.env_steps = env_steps_;
    row.eval_reward_mean = last_eval_.mean;
    row.eval_reward_std = last_eval_.std;
    row.policy_loss = objective.loss();
    row.critic_loss = critic_loss;
    row.grad_evals = grad_evals_;
    row.update_wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    return row;
  }

  std::vector<CurveRow> Train(
      const std::function<void(const CurveRow&)>& on_episode = {}) {
    std::vector<CurveRow> rows;
    while (episode_ < cfg_.episodes) {
      rows.push_back(TrainEpisode());
      if (on_episode) on_episode(rows.back());
    }
    return rows;
  }

  int degenerate_steps() const { return degenerate_steps_; }

 private:
  Env env_;
  diffsim::EnvParams params_;
  ShacConfig cfg_;
  std::uint64_t seed_;
  nets::PolicyNet policy_;
  nets::CriticNet critic_;
  nets::CriticNet target_critic_;
  optim::Adam actor_opt_;
  optim::Adam critic_opt_;
  std::vector<LaneState> lanes_;
  int episode_ = 0;
  std::int64_t env_steps_ = 0;
  std::int64_t grad_evals_ = 0;
  int degenerate_steps_ = 0;
  MeanStd last_eval_;
};

}  // namespace rl_lab::shac

#endif  // RL_LAB_SHAC_TRAINER_H_
