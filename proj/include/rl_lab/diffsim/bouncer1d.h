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

#ifndef RL_LAB_DIFFSIM_BOUNCER1D_H_
#define RL_LAB_DIFFSIM_BOUNCER1D_H_

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <string_view>

#include "rl_lab/common/random.h"
#include "rl_lab/diffsim/env.h"

namespace rl_lab::diffsim {

// Vertical point mass with a thruster above a penalty-contact ground.
//
//   d   = max(0, -y)
//   f_n = max(0, k_e d - k_d v [d > 0])
//   v'  = v + dt (a u_max - m g + f_n) / m
//   y'  = y + dt v'
//   r   = y' - 0.1 a^2
//
// The reward is evaluated on the post-step height.
class Bouncer1D {
 public:
  static constexpr std::string_view kName = "bouncer1d";
  static constexpr int kObsDim = 2;
  static constexpr int kActDim = 1;

  static constexpr double kMass = 1.0;        // kg
  static constexpr double kMaxThrust = 15.0;  // N
  static constexpr double kActionCost = 0.1;

  using Action = std::array<double, kActDim>;
  using Observation = std::array<double, kObsDim>;

  struct Tape {
    EnvState state;
    Action action{};
    EnvParams params;
    bool in_contact = false;    // d > 0
    bool force_active = false;  // k_e d - k_d v > 0 while in contact
  };

  static EnvParams DefaultParams() {
    return EnvParams{.k_e = 400.0, .k_d = 10.0, .mu = 0.5, .dt = 0.01,
                     .horizon = 240};
  }

  static double NormalForce(const EnvState& s, const EnvParams& p) {
    const double d = std::max(0.0, -s.q);
    const double raw = p.k_e * d - (d > 0.0 ? p.k_d * s.v : 0.0);
    return std::max(0.0, raw);
  }

  StepResult<Tape> Step(const EnvState& s, const Action& a,
                        const EnvParams& p) const {
    internal::CheckState(s);
    internal::CheckAction(a);

    Tape tape{.state = s, .action = a, .params = p};
    const double d = std::max(0.0, -s.q);
    tape.in_contact = ReluActive(-s.q);
    const double raw = p.k_e * d - (tape.in_contact ? p.k_d * s.v : 0.0);
    tape.force_active = tape.in_contact && ReluActive(raw);
    const double f_n = tape.force_active ? raw : 0.0;

    const double u = a[0] * kMaxThrust;
    EnvState next;
    next.v = s.v + p.dt * (u - kMass * kGravity + f_n) / kMass;
    next.q = s.q + p.dt * next.v;
    next.t = s.t + 1;
    if (!IsFinite(next)) throw NonFiniteState("bouncer1d: integration blew up");

    const double reward = next.q - kActionCost * a[0] * a[0];
    return {next, reward, tape};
  }

  VjpResult<kActDim> Vjp(const Tape& tape, const StateCotangent& w,
                         double w_reward) const {
    const EnvParams& p = tape.params;
    // reward reads y' directly
    const double wy = w.q + w_reward;
    // y' = y + dt v'
    const double wv = w.v + p.dt * wy;

    double dfn_dy = 0.0;
    double dfn_dv = 0.0;
    if (tape.force_active) {
      dfn_dy = -p.k_e;
      dfn_dv = -p.k_d;
    }

    VjpResult<kActDim> out;
    out.state.q = wy + wv * p.dt * dfn_dy / kMass;
    out.state.v = wv * (1.0 + p.dt * dfn_dv / kMass);
    out.action[0] = wv * p.dt * kMaxThrust / kMass -
                    w_reward * 2.0 * kActionCost * tape.action[0];
    return out;
  }

  Observation Observe(const EnvState& s) const { return {s.q, s.v}; }

  StateCotangent ObserveVjp(const EnvState&, const Observation& w) const {
    return {w[0], w[1]};
  }

  // y0 ~ U[0.8, 1.2] m, v0 ~ U[-0.1, 0.1] m/s
  EnvState Reset(std::uint64_t seed, const EnvParams&) const {
    Rng rng = MakeRng({kTagReset, seed});
    std::uniform_real_distribution<double> height(0.8, 1.2);
    std::uniform_real_distribution<double> speed(-0.1, 0.1);
    EnvState s;
    s.q = height(rng);
    s.v = speed(rng);
    return s;
  }

  // kinetic + gravitational + contact-spring energy
  static double MechanicalEnergy(const EnvState& s, const EnvParams& p) {
    const double d = std::max(0.0, -s.q);
    return 0.5 * kMass * s.v * s.v + kMass * kGravity * s.q +
           0.5 * p.k_e * d * d;
  }
};

static_assert(DifferentiableEnv<Bouncer1D>);

}  // namespace rl_lab::diffsim

#endif  // RL_LAB_DIFFSIM_BOUNCER1D_H_
