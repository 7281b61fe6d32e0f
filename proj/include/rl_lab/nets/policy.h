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

// Gaussian policy with a tanh-squashed mean and a state-independent log
// standard deviation, and the scalar value function.  Both own a flat
// ParamVector and expose exact reverse-mode gradients.

#ifndef RL_LAB_NETS_POLICY_H_
#define RL_LAB_NETS_POLICY_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rl_lab/common/random.h"
#include "rl_lab/nets/mlp.h"
#include "rl_lab/nets/param_vector.h"

namespace rl_lab::nets {

inline const std::vector<int> kDefaultHidden = {64, 64};

struct PolicyTape {
  std::vector<double> mlp;         // Mlp tape
  std::vector<double> mean;        // tanh(head)
  std::vector<double> noise;       // standard-normal draw
  std::vector<double> action_raw;  // pre-clip action
};

class PolicyNet {
 public:
  static constexpr double kMinStd = 1e-3;
  static constexpr double kMaxStd = 1.0;
  static constexpr double kInitStd = 0.3;
  static constexpr double kHeadScale = 0.01;

  PolicyNet() = default;
  PolicyNet(int obs_dim, int act_dim,
            std::vector<int> hidden = kDefaultHidden)
      : mlp_(obs_dim, std::move(hidden), act_dim) {
    ParamLayout::Builder builder;
    mlp_.AddToLayout(builder);
    builder.Add("log_std", act_dim);
    params_ = ParamVector(builder.Build());
    mlp_.Bind(params_.layout());
    log_std_offset_ = params_.layout().slot("log_std").offset;
    for (int j = 0; j < act_dim; ++j) {
      params_[log_std_offset_ + j] = std::log(kInitStd);
    }
  }

  int obs_dim() const { return mlp_.in_dim(); }
  int act_dim() const { return mlp_.out_dim(); }
  const Mlp& mlp() const { return mlp_; }

  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  // "policy 2-64-64-1 tanh"
  std::string ArchString() const {
    return "policy " + mlp_.ShapeString() + " tanh";
  }

  void Initialize(std::uint64_t seed) {
    Rng rng = MakeRng({kTagInit, seed, 0});
    mlp_.Initialize(params_.values(), rng, kHeadScale);
    for (int j = 0; j < act_dim(); ++j) {
      params_[log_std_offset_ + j] = std::log(kInitStd);
    }
  }

  static double ClampLogStd(double raw) {
    return std::clamp(raw, std::log(kMinStd), std::log(kMaxStd));
  }
  static bool LogStdInRange(double raw) {
    return raw >= std::log(kMinStd) && raw <= std::log(kMaxStd);
  }

  double log_std(int j) const {
    return ClampLogStd(params_[log_std_offset_ + j]);
  }
  double stddev(int j) const { return std::exp(log_std(j)); }

  // tanh-squashed mean; fills the tape when given
  std::vector<double> Mean(std::span<const double> obs,
                           PolicyTape* tape = nullptr) const {
    CheckObs(obs);
    std::vector<double> buf(mlp_.tape_size());
    mlp_.Forward(params_.values(), obs, buf);
    std::span<const double> head = mlp_.Output(buf);
    std::vector<double> mean(head.size());
    for (std::size_t j = 0; j < head.size(); ++j) mean[j] = std::tanh(head[j]);
    if (tape != nullptr) {
      tape->mlp = std::move(buf);
      tape->mean = mean;
    }
    return mean;
  }

  // Reparameterized sample: tanh(mlp(obs)) + exp(log_std) * noise.
  std::vector<double> Forward(std::span<const double> obs,
                              std::span<const double> noise,
                              PolicyTape* tape = nullptr) const {
    if (static_cast<int>(noise.size()) != act_dim()) {
      throw std::invalid_argument("policy: noise dimension mismatch");
    }
    PolicyTape local;
    PolicyTape& t = tape != nullptr ? *tape : local;
    std::vector<double> mean = Mean(obs, &t);
    t.noise.assign(noise.begin(), noise.end());
    t.action_raw.resize(mean.size());
    for (int j = 0; j < act_dim(); ++j) {
      t.action_raw[j] = mean[j] + stddev(j) * noise[j];
    }
    return t.action_raw;
  }

  // Cotangents on the mean and on the (clamped) log std, accumulated into
  // grad; d_obs receives the observation cotangent when non-empty.
  void BackwardMeanLogStd(const PolicyTape& tape,
                          std::span<const double> d_mean,
                          std::span<const double> d_log_std, ParamVector& grad,
                          std::span<double> d_obs = {}) const {
    std::vector<double> d_head(act_dim());
    for (int j = 0; j < act_dim(); ++j) {
      d_head[j] = d_mean[j] * (1.0 - tape.mean[j] * tape.mean[j]);
    }
    mlp_.Backward(params_.values(), tape.mlp, d_head, grad.values(), d_obs);
    for (int j = 0; j < act_dim(); ++j) {
      if (LogStdInRange(params_[log_std_offset_ + j])) {
        grad[log_std_offset_ + j] += d_log_std[j];
      }
    }
  }

  // Reverse pass of Forward for a cotangent on the pre-clip action.
  void Backward(const PolicyTape& tape, std::span<const double> d_action_raw,
                ParamVector& grad, std::span<double> d_obs = {}) const {
    std::vector<double> d_log_std(act_dim());
    for (int j = 0; j < act_dim(); ++j) {
      d_log_std[j] = d_action_raw[j] * stddev(j) * tape.noise[j];
    }
    BackwardMeanLogStd(tape, d_action_raw, d_log_std, grad, d_obs);
  }

  // log N(a; mean, std^2) summed over action components
  double LogProb(std::span<const double> mean,
                 std::span<const double> action) const {
    double lp = 0.0;
    for (int j = 0; j < act_dim(); ++j) {
      const double z = (action[j] - mean[j]) / stddev(j);
      lp += -0.5 * z * z - log_std(j) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    return lp;
  }

  double Entropy() const {
    double h = 0.0;
    for (int j = 0; j < act_dim(); ++j) {
      h += log_std(j) + 0.5 * (1.0 + std::log(2.0 * std::numbers::pi));
    }
    return h;
  }

 private:
  void CheckObs(std::span<const double> obs) const {
    if (static_cast<int>(obs.size()) != obs_dim()) {
      throw std::invalid_argument("policy: observation dimension mismatch");
    }
  }

  Mlp mlp_;
  ParamVector params_;
  std::size_t log_std_offset_ = 0;
};

struct CriticTape {
  std::vector<double> mlp;
};

class CriticNet {
 public:
  CriticNet() = default;
  explicit CriticNet(int obs_dim, std::vector<int> hidden = kDefaultHidden)
      : mlp_(obs_dim, std::move(hidden), 1) {
    ParamLayout::Builder builder;
    mlp_.AddToLayout(builder);
    params_ = ParamVector(builder.Build());
    mlp_.Bind(params_.layout());
  }

  int obs_dim() const { return mlp_.in_dim(); }
  const Mlp& mlp() const { return mlp_; }
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  std::string ArchString() const {
    return "critic " + mlp_.ShapeString() + " tanh";
  }

  void Initialize(std::uint64_t seed) {
    Rng rng = MakeRng({kTagInit, seed, 1});
    mlp_.Initialize(params_.values(), rng, 1.0);
  }

  double Forward(std::span<const double> obs,
                 CriticTape* tape = nullptr) const {
    if (static_cast<int>(obs.size()) != obs_dim()) {
      throw std::invalid_argument("critic: observation dimension mismatch");
    }
    std::vector<double> buf(mlp_.tape_size());
    mlp_.Forward(params_.values(), obs, buf);
    const double v = mlp_.Output(buf)[0];
    if (tape != nullptr) tape->mlp = std::move(buf);
    return v;
  }

  void Backward(const CriticTape& tape, double d_value, ParamVector& grad,
                std::span<double> d_obs = {}) const {
    const double d[1] = {d_value};
    mlp_.Backward(params_.values(), tape.mlp, d, grad.values(), d_obs);
  }

  // dV/d(obs) without touching parameter gradients
  std::vector<double> InputGradient(std::span<const double> obs) const {
    CriticTape tape;
    Forward(obs, &tape);
    std::vector<double> d_obs(obs_dim());
    const double d[1] = {1.0};
    mlp_.Backward(params_.values(), tape.mlp, d, {}, d_obs);
    return d_obs;
  }

 private:
  Mlp mlp_;
  ParamVector params_;
};

}  // namespace rl_lab::nets

#endif  // RL_LAB_NETS_POLICY_H_
