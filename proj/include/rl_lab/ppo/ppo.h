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

// Clipped-surrogate PPO with generalized advantage estimation.  The
// baseline only steps the simulator; it never reads step tapes or calls a
// vector-Jacobian product.

#ifndef RL_LAB_PPO_PPO_H_
#define RL_LAB_PPO_PPO_H_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rl_lab/common/episode.h"
#include "rl_lab/common/lanes.h"
#include "rl_lab/common/random.h"
#include "rl_lab/diffsim/env.h"
#include "rl_lab/nets/param_vector.h"
#include "rl_lab/nets/policy.h"
#include "rl_lab/optim/adam.h"

namespace rl_lab::ppo {

using nets::ParamVector;

struct PpoConfig {
  int num_envs = 32;
  int rollout_steps = 64;  // per lane and iteration
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  int epochs = 4;
  int minibatch_count = 4;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  double entropy_coef = 1e-3;
  std::int64_t total_env_steps = 256000;
  double max_grad_norm = 1.0;
  int eval_interval = 1;  // iterations between evaluations
  int eval_rollouts = 8;
  std::vector<int> hidden = nets::kDefaultHidden;
};

inline void Validate(const PpoConfig& c) {
  if (c.num_envs < 1) throw std::invalid_argument("num_envs must be >= 1");
  if (c.rollout_steps < 1) {
    throw std::invalid_argument("rollout_steps must be >= 1");
  }
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1]");
  }
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) {
    throw std::invalid_argument("gae_lambda must lie in [0, 1]");
  }
  if (!(c.clip_ratio > 0.0)) {
    throw std::invalid_argument("clip_ratio must be > 0");
  }
  if (c.epochs < 1 || c.minibatch_count < 1) {
    throw std::invalid_argument("epochs and minibatch_count must be >= 1");
  }
  if (c.minibatch_count > c.num_envs * c.rollout_steps) {
    throw std::invalid_argument("minibatch_count exceeds the batch size");
  }
  if (c.total_env_steps <
      static_cast<std::int64_t>(c.num_envs) * c.rollout_steps) {
    throw std::invalid_argument(
        "total_env_steps must be >= num_envs * rollout_steps");
  }
  if (c.eval_interval < 1 || c.eval_rollouts < 1) {
    throw std::invalid_argument("eval interval/rollouts must be >= 1");
  }
}

// Lane-major on-policy samples.
struct PpoBatch {
  int num_lanes = 0;
  int steps_per_lane = 0;
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<double> obs;         // size * obs_dim
  std::vector<double> next_obs;    // size * obs_dim, before any reset
  std::vector<double> action_raw;  // size * act_dim, pre-clip sample
  std::vector<double> log_prob;    // of action_raw under the sampling policy
  std::vector<double> reward;
  std::vector<std::uint8_t> terminated;   // no bootstrap past this step
  std::vector<std::uint8_t> episode_end;  // lane reset after this step
  int lane_failures = 0;

  std::size_t size() const { return reward.size(); }
  std::span<const double> obs_at(std::size_t s) const {
    return std::span<const double>(obs).subspan(s * obs_dim, obs_dim);
  }
  std::span<const double> next_obs_at(std::size_t s) const {
    return std::span<const double>(next_obs).subspan(s * obs_dim, obs_dim);
  }
  std::span<const double> action_at(std::size_t s) const {
    return std::span<const double>(action_raw).subspan(s * act_dim, act_dim);
  }
};

// Stochastic rollouts of rollout_steps on every lane.  Step tapes are
// dropped as soon as the step returns.
template <diffsim::DifferentiableEnv Env>
PpoBatch Collect(const Env& env, const diffsim::EnvParams& params,
                 const nets::PolicyNet& policy, std::vector<LaneState>& lanes,
                 int rollout_steps) {
  PpoBatch b;
  b.num_lanes = static_cast<int>(lanes.size());
  b.steps_per_lane = rollout_steps;
  b.obs_dim = Env::kObsDim;
  b.act_dim = Env::kActDim;
  const std::size_t n = lanes.size() * rollout_steps;
  b.obs.reserve(n * Env::kObsDim);
  b.next_obs.reserve(n * Env::kObsDim);
  b.action_raw.reserve(n * Env::kActDim);
  b.log_prob.reserve(n);
  b.reward.reserve(n);
  b.terminated.reserve(n);
  b.episode_end.reserve(n);

  std::vector<double> noise(Env::kActDim);
  for (LaneState& lane : lanes) {
    for (int k = 0; k < rollout_steps; ++k) {
      const typename Env::Observation obs = env.Observe(lane.state);
      for (double& z : noise) z = lane.normal(lane.noise_rng);
      nets::PolicyTape tape;
      const std::vector<double> raw = policy.Forward(obs, noise, &tape);
      b.obs.insert(b.obs.end(), obs.begin(), obs.end());
      b.action_raw.insert(b.action_raw.end(), raw.begin(), raw.end());
      b.log_prob.push_back(policy.LogProb(tape.mean, raw));

      diffsim::EnvState next = lane.state;
      double reward = 0.0;
      bool end = false;
      bool terminated = false;
      try {
        const auto res =
            env.Step(lane.state, ClipAction<Env::kActDim>(raw), params);
        next = res.next;
        reward = res.reward;
        end = res.next.t >= params.horizon;
      } catch (const diffsim::NonFiniteState&) {
        end = true;
        terminated = true;
        ++b.lane_failures;
      }
      const typename Env::Observation next_obs = env.Observe(next);
      b.next_obs.insert(b.next_obs.end(), next_obs.begin(), next_obs.end());
      b.reward.push_back(reward);
      b.terminated.push_back(terminated);
      b.episode_end.push_back(end);
      lane.state = end ? ResetLane(env, params, lane) : next;
    }
  }
  return b;
}

// GAE on one lane:
//   delta_t = r_t + gamma V(s_(t+1)) (1 - terminated_t) - V(s_t)
//   A_t     = delta_t + gamma lambda A_(t+1)   (chain cut at episode ends)
inline std::vector<double> GaeLane(std::span<const double> rewards,
                                   std::span<const double> values,
                                   std::span<const double> next_values,
                                   std::span<const std::uint8_t> terminated,
                                   std::span<const std::uint8_t> episode_end,
                                   double gamma, double lambda) {
  const std::size_t n = rewards.size();
  std::vector<double> adv(n);
  double carry = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    if (episode_end[t]) carry = 0.0;
    const double boot = terminated[t] ? 0.0 : next_values[t];
    const double delta = rewards[t] + gamma * boot - values[t];
    carry = delta + gamma * lambda * carry;
    adv[t] = carry;
  }
  return adv;
}

struct Advantages {
  std::vector<double> raw;         // unnormalized A_t
  std::vector<double> normalized;  // zero mean, unit variance
  std::vector<double> targets;     // A_t + V(s_t)
};

inline std::vector<double> NormalizeAdvantages(std::span<const double> a) {
  const MeanStd ms = ComputeMeanStd(a);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = (a[i] - ms.mean) / (ms.std + 1e-8);
  }
  return out;
}

inline Advantages GaeAdvantages(const PpoBatch& b, const nets::CriticNet& critic,
                                double gamma, double lambda) {
  const std::size_t n = b.size();
  std::vector<double> values(n), next_values(n);
  for (std::size_t s = 0; s < n; ++s) {
    values[s] = critic.Forward(b.obs_at(s));
    next_values[s] = b.terminated[s] ? 0.0 : critic.Forward(b.next_obs_at(s));
  }
  Advantages out;
  out.raw.resize(n);
  const std::size_t t_len = b.steps_per_lane;
  for (int i = 0; i < b.num_lanes; ++i) {
    const std::size_t off = i * t_len;
    const auto lane = [&](const auto& v) {
      return std::span(v).subspan(off, t_len);
    };
    const std::vector<double> a =
        GaeLane(lane(b.reward), lane(values), lane(next_values),
                lane(b.terminated), lane(b.episode_end), gamma, lambda);
    std::copy(a.begin(), a.end(), out.raw.begin() + off);
  }
  out.normalized = NormalizeAdvantages(out.raw);
  out.targets.resize(n);
  for (std::size_t s = 0; s < n; ++s) out.targets[s] = out.raw[s] + values[s];
  return out;
}

struct SurrogateResult {
  double loss = 0.0;           // clipped surrogate + entropy bonus
  double surrogate = 0.0;      // -mean(min(r A, clip(r) A))
  double clip_fraction = 0.0;  // share of samples with |r - 1| > clip
  double approx_kl = 0.0;      // mean(logp_old - logp_new)
  ParamVector grad;
};

// Per-sample clipped objective min(r A, clip(r, 1 +- eps) A) and its
// derivative with respect to log pi_new.
struct ClippedTerm {
  double objective = 0.0;
  double d_logp = 0.0;
};

inline ClippedTerm ClipObjective(double ratio, double adv, double clip) {
  const double unclipped = ratio * adv;
  const double clipped =
      std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
  if (unclipped <= clipped) return {unclipped, unclipped};
  return {clipped, 0.0};
}

// Loss and policy gradient over the samples in idx.
inline SurrogateResult ClippedSurrogate(const nets::PolicyNet& policy,
                                        const PpoBatch& b,
                                        std::span<const double> adv,
                                        std::span<const std::size_t> idx,
                                        double clip, double entropy_coef) {
  SurrogateResult out;
  out.grad = policy.params().ZerosLike();
  const int m = policy.act_dim();
  const double inv = 1.0 / static_cast<double>(idx.size());
  std::vector<double> d_mean(m), d_log_std(m);
  nets::PolicyTape tape;
  int clipped = 0;
  for (std::size_t s : idx) {
    const std::vector<double> mean = policy.Mean(b.obs_at(s), &tape);
    const std::span<const double> a = b.action_at(s);
    const double logp = policy.LogProb(mean, a);
    const double ratio = std::exp(logp - b.log_prob[s]);
    const ClippedTerm term = ClipObjective(ratio, adv[s], clip);
    out.surrogate -= term.objective * inv;
    out.approx_kl += (b.log_prob[s] - logp) * inv;
    if (std::fabs(ratio - 1.0) > clip) ++clipped;
    const double g = -term.d_logp * inv;
    for (int j = 0; j < m; ++j) {
      const double var = policy.stddev(j) * policy.stddev(j);
      const double diff = a[j] - mean[j];
      d_mean[j] = g * diff / var;
      d_log_std[j] = g * (diff * diff / var - 1.0);
    }
    policy.BackwardMeanLogStd(tape, d_mean, d_log_std, out.grad);
  }
  // entropy bonus depends on log std only
  std::vector<double> zeros(m, 0.0), d_ent(m, -entropy_coef);
  if (!idx.empty()) {
    policy.Mean(b.obs_at(idx[0]), &tape);
    policy.BackwardMeanLogStd(tape, zeros, d_ent, out.grad);
  }
  out.clip_fraction = clipped * inv;
  out.loss = out.surrogate - entropy_coef * policy.Entropy();
  return out;
}

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int minibatch_updates = 0;
};

// epochs x minibatches of Adam on both networks; statistics are averaged
// over all minibatch updates.
inline UpdateStats PpoUpdate(nets::PolicyNet& policy, nets::CriticNet& critic,
                             optim::Adam& actor_opt, optim::Adam& critic_opt,
                             const PpoBatch& b, const Advantages& adv,
                             const PpoConfig& cfg, Rng& shuffle_rng) {
  UpdateStats st;
  std::vector<std::size_t> order(b.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t n = order.size();
  const std::size_t mb = static_cast<std::size_t>(cfg.minibatch_count);
  nets::CriticTape ctape;
  for (int e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t k = 0; k < mb; ++k) {
      const std::size_t lo = n * k / mb;
      const std::size_t hi = n * (k + 1) / mb;
      const std::span<const std::size_t> idx(order.data() + lo, hi - lo);

      SurrogateResult sr = ClippedSurrogate(policy, b, adv.normalized, idx,
                                            cfg.clip_ratio, cfg.entropy_coef);
      optim::ClipGradNorm(sr.grad, cfg.max_grad_norm);
      actor_opt.Step(policy.params(), sr.grad);

      ParamVector cgrad = critic.params().ZerosLike();
      const double inv = 1.0 / static_cast<double>(idx.size());
      double vloss = 0.0;
      for (std::size_t s : idx) {
        const double r = critic.Forward(b.obs_at(s), &ctape) - adv.targets[s];
        vloss += r * r * inv;
        critic.Backward(ctape, 2.0 * r * inv, cgrad);
      }
      optim::ClipGradNorm(cgrad, cfg.max_grad_norm);
      critic_opt.Step(critic.params(), cgrad);

      st.policy_loss += sr.loss;
      st.value_loss += vloss;
      st.clip_fraction += sr.clip_fraction;
      st.approx_kl += sr.approx_kl;
      ++st.minibatch_updates;
    }
  }
  const double inv = 1.0 / st.minibatch_updates;
  st.policy_loss *= inv;
  st.value_loss *= inv;
  st.clip_fraction *= inv;
  st.approx_kl *= inv;
  return st;
}

template <diffsim::DifferentiableEnv Env>
class PpoTrainer {
 public:
  PpoTrainer(Env env, diffsim::EnvParams params, PpoConfig cfg,
             std::uint64_t seed)
      : env_(std::move(env)),
        params_(params),
        cfg_(std::move(cfg)),
        seed_(seed),
        policy_(Env::kObsDim, Env::kActDim, cfg_.hidden),
        critic_(Env::kObsDim, cfg_.hidden) {
    diffsim::ValidateParams(params_);
    Validate(cfg_);
    policy_.Initialize(seed_);
    critic_.Initialize(seed_);
    actor_opt_ = optim::Adam(policy_.params(), cfg_.actor_lr);
    critic_opt_ = optim::Adam(critic_.params(), cfg_.critic_lr);
    lanes_ = InitLanes(env_, params_, seed_, cfg_.num_envs);
    shuffle_rng_ = MakeRng({kTagShuffle, seed_});
    const std::int64_t per = static_cast<std::int64_t>(cfg_.num_envs) *
                             cfg_.rollout_steps;
    iterations_ = static_cast<int>((cfg_.total_env_steps + per - 1) / per);
  }

  const nets::PolicyNet& policy() const { return policy_; }
  const nets::CriticNet& critic() const { return critic_; }
  const PpoConfig& config() const { return cfg_; }
  int iterations() const { return iterations_; }
  int iteration() const { return iteration_; }
  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t grad_evals() const { return grad_evals_; }
  const UpdateStats& last_stats() const { return last_stats_; }

  CurveRow TrainIteration() {
    ++iteration_;
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    const PpoBatch batch =
        Collect(env_, params_, policy_, lanes_, cfg_.rollout_steps);
    env_steps_ += static_cast<std::int64_t>(batch.size());
    if (batch.lane_failures > 0) {
      std::clog << "[ppo] iteration " << iteration_ << ": "
                << batch.lane_failures
                << " lane(s) reset after non-finite state\n";
    }
    if (batch.lane_failures > kMaxLaneFailuresPerUpdate) {
      throw TrainingAborted("more than " +
                            std::to_string(kMaxLaneFailuresPerUpdate) +
                            " non-finite lane resets in iteration " +
                            std::to_string(iteration_));
    }
    const Advantages adv =
        GaeAdvantages(batch, critic_, cfg_.gamma, cfg_.gae_lambda);
    last_stats_ = PpoUpdate(policy_, critic_, actor_opt_, critic_opt_, batch,
                            adv, cfg_, shuffle_rng_);
    grad_evals_ += last_stats_.minibatch_updates;
    const auto t1 = Clock::now();

    if (iteration_ % cfg_.eval_interval == 0 || iteration_ == iterations_ ||
        iteration_ == 1) {
      last_eval_ = EvaluateClean(env_, params_, policy_, cfg_.eval_rollouts);
    }
    CurveRow row;
    row.episode = iteration_;
    row.env_steps = env_steps_;
    row.eval_reward_mean = last_eval_.mean;
    row.eval_reward_std = last_eval_.std;
    row.policy_loss = last_stats_.policy_loss;
    row.critic_loss = last_stats_.value_loss;
    row.grad_evals = grad_evals_;
    row.update_wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    return row;
  }

  std::vector<CurveRow> Train(
      const std::function<void(const CurveRow&)>& on_iteration = {}) {
    std::vector<CurveRow> rows;
    while (iteration_ < iterations_) {
      rows.push_back(TrainIteration());
      if (on_iteration) on_iteration(rows.back());
    }
    return rows;
  }

 private:
  Env env_;
  diffsim::EnvParams params_;
  PpoConfig cfg_;
  std::uint64_t seed_;
  nets::PolicyNet policy_;
  nets::CriticNet critic_;
  optim::Adam actor_opt_;
  optim::Adam critic_opt_;
  std::vector<LaneState> lanes_;
  Rng shuffle_rng_;
  int iterations_ = 0;
  int iteration_ = 0;
  std::int64_t env_steps_ = 0;
  std::int64_t grad_evals_ = 0;
  UpdateStats last_stats_;
  MeanStd last_eval_;
};

}  // namespace rl_lab::ppo

#endif  // RL_LAB_PPO_PPO_H_
