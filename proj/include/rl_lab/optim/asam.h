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

// Adaptive sharpness-aware minimization (p = 2, T = diag(|theta|)).
//
// One update is two gradient evaluations:
//   1. g   = grad L(theta)
//      eps = rho * T^2 g / ||T g||_2
//   2. g~  = grad L(theta + eps)
//      theta <- base_step(theta, g~ + weight_decay * theta)

#ifndef RL_LAB_OPTIM_ASAM_H_
#define RL_LAB_OPTIM_ASAM_H_

#include <cmath>
#include <stdexcept>

#include "rl_lab/nets/param_vector.h"
#include "rl_lab/optim/adam.h"

namespace rl_lab::optim {

struct AsamConfig {
  double rho = 0.75;
  double weight_decay = 0.0;
  double denom_floor = 1e-12;
};

inline void ValidateAsam(const AsamConfig& cfg) {
  if (!(cfg.rho > 0.0)) throw std::invalid_argument("asam: rho must be > 0");
  if (!(cfg.weight_decay >= 0.0)) {
    throw std::invalid_argument("asam: weight_decay must be >= 0");
  }
}

struct Perturbation {
  ParamVector epsilon;
  // ||T g||_2 fell below denom_floor; epsilon is zero
  bool degenerate = false;
};

inline Perturbation AsamPerturb(const ParamVector& params,
                                const ParamVector& grad,
                                const AsamConfig& cfg) {
  if (!params.SameLayout(grad)) {
    throw std::invalid_argument("asam: layout mismatch");
  }
  Perturbation out{params.ZerosLike(), false};
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double tg = std::fabs(params[i]) * grad[i];
    sq += tg * tg;
  }
  const double norm = std::sqrt(sq);
  if (norm < cfg.denom_floor) {
    out.degenerate = true;
    return out;
  }
  const double scale = cfg.rho / (norm + cfg.denom_floor);
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.epsilon[i] = scale * params[i] * params[i] * grad[i];
  }
  return out;
}

// Second half of the two-step procedure.  params must hold the unperturbed
// theta; grad_at_perturbed is the gradient evaluated at theta + epsilon.
template <BaseOptimizer Base>
void AsamUpdate(ParamVector& params, const ParamVector& grad_at_perturbed,
                Base& base, const AsamConfig& cfg) {
  if (cfg.weight_decay == 0.0) {
    base.Step(params, grad_at_perturbed);
    return;
  }
  ParamVector effective = grad_at_perturbed;
  effective.AddScaled(cfg.weight_decay, params);
  base.Step(params, effective);
}

}  // namespace rl_lab::optim

#endif  // RL_LAB_OPTIM_ASAM_H_
