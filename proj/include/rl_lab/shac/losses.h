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

#ifndef RL_LAB_SHAC_LOSSES_H_
#define RL_LAB_SHAC_LOSSES_H_

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "rl_lab/diffsim/env.h"
#include "rl_lab/nets/param_vector.h"
#include "rl_lab/nets/policy.h"
#include "rl_lab/optim/adam.h"
#include "rl_lab/shac/rollout.h"

namespace rl_lab::shac {

using nets::ParamVector;

// Short-horizon policy objective over one batch:
//
//   L = -1/(N h) sum_i [ sum_t gamma^(t - t0) r_t + gamma^h V0(s_(t0 + h)) ]
//
// A lane whose episode ends inside the window contributes one term per
// segment, with the discount restarting at each reset.  Terminated segments
// drop the bootstrap; time-limit ends bootstrap from the pre-reset state.
// Segment start states are treated as constants.
template <diffsim::DifferentiableEnv Env>
class PolicyObjective {
 public:
  PolicyObjective(const Env& env, const HorizonBatch<Env>& batch,
                  const nets::CriticNet& target_critic, double gamma)
      : env_(env), batch_(batch), gamma_(gamma) {
    const int n = batch.num_lanes;
    const int h = batch.horizon;
    scale_ = 1.0 / (static_cast<double>(n) * h);
    discount_.resize(batch.steps.size());
    bootstrap_.assign(batch.steps.size(), diffsim::StateCotangent{});

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double pow = 1.0;
      for (int k = 0; k < h; ++k) {
        if (batch.SegmentStart(i, k)) pow = 1.0;
        const Transition<Env>& tr = batch.at(i, k);
        discount_[i * h + k] = pow;
        total += pow * tr.reward;
        pow *= gamma_;
        if (batch.SegmentEnd(i, k) && !tr.terminated) {
          const typename Env::Observation obs = env.Observe(tr.next_state);
          total += pow * target_critic.Forward(obs);
          const std::vector<double> dv = target_critic.InputGradient(obs);
          typename Env::Observation w{};
          for (int j = 0; j < Env::kObsDim; ++j) w[j] = -scale_ * pow * dv[j];
          bootstrap_[i * h + k] = env.ObserveVjp(tr.next_state, w);
        }
      }
    }
    loss_ = -scale_ * total;
  }

  double loss() const { return loss_; }

  // Backpropagation through time, lane by lane in reverse step order.
  ParamVector Gradient(const nets::PolicyNet& policy,
                       std::span<const nets::PolicyTape> tapes) const {
    ParamVector grad = policy.params().ZerosLike();
    const int h = batch_.horizon;
    std::vector<double> d_raw(Env::kActDim);
    typename Env::Observation d_obs{};
    for (int i = 0; i < batch_.num_lanes; ++i) {
      diffsim::StateCotangent carry;  // cotangent on the next state
      for (int k = h - 1; k >= 0; --k) {
        const int idx = i * h + k;
        const Transition<Env>& tr = batch_.at(i, k);
        if (batch_.SegmentEnd(i, k)) carry = bootstrap_[idx];
        if (tr.failed()) {
          carry = {};
          continue;
        }
        const double w_reward = -scale_ * discount_[idx];
        const auto vjp = env_.Vjp(*tr.step_tape, carry, w_reward);
        const nets::PolicyTape& tape = tapes[idx];
        for (int j = 0; j < Env::kActDim; ++j) {
          const double raw = tape.action_raw[j];
          d_raw[j] = (raw >= -1.0 && raw <= 1.0) ? vjp.action[j] : 0.0;
        }
        policy.Backward(tape, d_raw, grad, d_obs);
        const diffsim::StateCotangent via_obs =
            env_.ObserveVjp(tr.state, d_obs);
        carry.q = vjp.state.q + via_obs.q;
        carry.v = vjp.state.v + via_obs.v;
        if (batch_.SegmentStart(i, k)) carry = {};
      }
    }
    return grad;
  }

  // Re-evaluates the policy on the recorded observations and noise, e.g. at
  // perturbed parameters.  States, actions and simulator tapes are reused.
  std::vector<nets::PolicyTape> Replay(const nets::PolicyNet& policy) const {
    std::vector<nets::PolicyTape> tapes(batch_.steps.size());
    for (std::size_t s = 0; s < batch_.steps.size(); ++s) {
      policy.Forward(batch_.steps[s].obs, batch_.steps[s].noise, &tapes[s]);
    }
    return tapes;
  }

 private:
  const Env& env_;
  const HorizonBatch<Env>& batch_;
  double gamma_;
  double scale_ = 0.0;
  double loss_ = 0.0;
  std::vector<double> discount_;
  std::vector<diffsim::StateCotangent> bootstrap_;
};

// TD(lambda) targets for one segment of length L:
//
//   G^(k)_t = sum_{l<k} gamma^l r_(t+l) + gamma^k V(s_(t+k))
//   V~_t    = (1 - lambda) sum_{k=1}^{L-t-1} lambda^(k-1) G^(k)_t
//             + lambda^(L-t-1) G^(L-t)_t
//
// next_values[t] = V(s_(t+1)); the last entry is ignored when terminated.
inline std::vector<double> TdLambdaSegment(std::span<const double> rewards,
                                           std::span<const double> next_values,
                                           bool terminated, double gamma,
                                           double lambda) {
  const std::size_t n = rewards.size();
  std::vector<double> targets(n);
  if (n == 0) return targets;
  const double tail = terminated ? 0.0 : next_values[n - 1];
  targets[n - 1] = rewards[n - 1] + gamma * tail;
  for (std::size_t t = n - 1; t-- > 0;) {
    targets[t] = rewards[t] + gamma * ((1.0 - lambda) * next_values[t] +
                                       lambda * targets[t + 1]);
  }
  return targets;
}

// Targets for every recorded state of the batch, lane-major.
template <diffsim::DifferentiableEnv Env>
std::vector<double> TdLambdaTargets(const Env& env,
                                    const HorizonBatch<Env>& batch,
                                    const nets::CriticNet& target_critic,
                                    double gamma, double lambda) {
  std::vector<double> targets(batch.steps.size());
  const int h = batch.horizon;
  std::vector<double> rewards, next_values;
  for (int i = 0; i < batch.num_lanes; ++i) {
    int start = 0;
    for (int k = 0; k < h; ++k) {
      const Transition<Env>& tr = batch.at(i, k);
      rewards.push_back(tr.reward);
      next_values.push_back(
          tr.terminated ? 0.0
                        : target_critic.Forward(env.Observe(tr.next_state)));
      if (batch.SegmentEnd(i, k)) {
        const std::vector<double> seg = TdLambdaSegment(
            rewards, next_values, tr.terminated, gamma, lambda);
        for (std::size_t t = 0; t < seg.size(); ++t) {
          targets[i * h + start + t] = seg[t];
        }
        rewards.clear();
        next_values.clear();
        start = k + 1;
      }
    }
  }
  return targets;
}

// Mean squared residual of the critic over a flat observation block.
inline double CriticLoss(const nets::CriticNet& critic,
                         std::span<const double> obs, int obs_dim,
                         std::span<const double> targets) {
  double sum = 0.0;
  for (std::size_t s = 0; s < targets.size(); ++s) {
    const double r = critic.Forward(obs.subspan(s * obs_dim, obs_dim)) -
                     targets[s];
    sum += r * r;
  }
  return targets.empty() ? 0.0 : sum / static_cast<double>(targets.size());
}

// Full-batch Adam fit of the critic towards fixed targets.  Returns the loss
// measured before the final step.
inline double FitCritic(nets::CriticNet& critic, optim::Adam& opt,
                        std::span<const double> obs, int obs_dim,
                        std::span<const double> targets, int epochs) {
  if (obs.size() != targets.size() * obs_dim) {
    throw std::invalid_argument("critic fit: obs/target size mismatch");
  }
  const double inv = targets.empty() ? 0.0 : 1.0 / targets.size();
  double last = 0.0;
  nets::CriticTape tape;
  for (int e = 0; e < epochs; ++e) {
    ParamVector grad = critic.params().ZerosLike();
    double sum = 0.0;
    for (std::size_t s = 0; s < targets.size(); ++s) {
      const double v = critic.Forward(obs.subspan(s * obs_dim, obs_dim), &tape);
      const double r = v - targets[s];
      sum += r * r;
      critic.Backward(tape, 2.0 * r * inv, grad);
    }
    last = sum * inv;
    opt.Step(critic.params(), grad);
  }
  return last;
}

// target <- alpha * target + (1 - alpha) * critic
inline void TargetMix(nets::CriticNet& target, const nets::CriticNet& critic,
                      double alpha) {
  ParamVector& t = target.params();
  const ParamVector& c = critic.params();
  if (!t.SameLayout(c)) throw std::invalid_argument("target mix: layout");
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = alpha * t[i] + (1.0 - alpha) * c[i];
  }
}

}  // namespace rl_lab::shac

#endif  // RL_LAB_SHAC_LOSSES_H_
