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

#ifndef RL_LAB_OPTIM_ADAM_H_
#define RL_LAB_OPTIM_ADAM_H_

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>

#include "rl_lab/nets/param_vector.h"

namespace rl_lab::optim {

using nets::ParamVector;

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ParamVector m;
  ParamVector v_hat;
  std::int64_t step_count = 0;

  AdamState() = default;
  explicit AdamState(const ParamVector& like)
      : m(like.ZerosLike()), v_hat(like.ZerosLike()) {}
};

// Bias-corrected Adam step with learning rate lr.
inline void AdamStep(ParamVector& params, const ParamVector& grad,
                     AdamState& state, double lr,
                     const AdamConfig& cfg = {}) {
  if (!params.SameLayout(grad) || !params.SameLayout(state.m)) {
    throw std::invalid_argument("adam: layout mismatch");
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v_hat[i] = cfg.beta2 * state.v_hat[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v_hat[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

// A first-order update rule that ASAM can wrap.
template <class O>
concept BaseOptimizer = requires(O& opt, ParamVector& p, const ParamVector& g) {
  opt.Step(p, g);
};

class Adam {
 public:
  Adam() = default;
  Adam(const ParamVector& like, double lr, AdamConfig cfg = {})
      : state_(like), lr_(lr), cfg_(cfg) {}

  void Step(ParamVector& params, const ParamVector& grad) {
    AdamStep(params, grad, state_, lr_, cfg_);
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  const AdamState& state() const { return state_; }

 private:
  AdamState state_;
  double lr_ = 1e-3;
  AdamConfig cfg_;
};

class Sgd {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void Step(ParamVector& params, const ParamVector& grad) {
    params.AddScaled(-lr_, grad);
  }

 private:
  double lr_;
};

static_assert(BaseOptimizer<Adam>);
static_assert(BaseOptimizer<Sgd>);

// Rescales grad in place so that its 2-norm is at most max_norm; returns the
// norm before clipping.
inline double ClipGradNorm(ParamVector& grad, double max_norm) {
  const double norm = grad.Norm2();
  if (norm > max_norm && norm > 0.0) grad *= max_norm / norm;
  return norm;
}

}  // namespace rl_lab::optim

#endif  // RL_LAB_OPTIM_ADAM_H_
