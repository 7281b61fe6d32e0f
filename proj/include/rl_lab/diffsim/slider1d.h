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

#ifndef RL_LAB_DIFFSIM_SLIDER1D_H_
#define RL_LAB_DIFFSIM_SLIDER1D_H_

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "rl_lab/common/random.h"
#include "rl_lab/diffsim/env.h"

namespace rl_lab::diffsim {

// Block pushed along the ground against smooth Coulomb friction, tracking a
// target speed.
//
//   f_t = -mu m g tanh(v / v_s)
//   v'  = v + dt (a u_max + f_t) / m
//   x'  = x + dt v'
//   r   = -(v' - v_target)^2 - 0.01 a^2
class Slider1D {
 public:
  static constexpr std::string_view kName = "slider1d";
  static constexpr int kObsDim = 2;
  static constexpr int kActDim = 1;

  static constexpr double kMass = 1.0;          // kg
  static constexpr double kMaxForce = 10.0;     // N
  static constexpr double kSlipSpeed = 0.1;     // v_s, m/s
  static constexpr double kActionCost = 0.01;

  using Action = std::array<double, kActDim>;
  using Observation = std::array<double, kObsDim>;

  struct Tape {
    EnvState state;
    Action action{};
    EnvParams params;
    double next_v = 0.0;
    double tanh_ratio = 0.0;  // tanh(v / v_s)
  };

  explicit Slider1D(double target_speed = 1.5) : target_speed_(target_speed) {}

  double target_speed() const { return target_speed_; }

  static EnvParams DefaultParams() {
    return EnvParams{.k_e = 400.0, .k_d = 10.0, .mu = 0.5, .dt = 0.01,
                     .horizon = 240};
  }

  static double FrictionForce(double v, const EnvParams& p) {
    return -p.mu * kMass * kGravity * std::tanh(v / kSlipSpeed);
  }

  StepResult<Tape> Step(const EnvState& s, const Action& a,
                        const EnvParams& p) const {
    internal::CheckState(s);
    internal::CheckAction(a);

    Tape tape{.state = s, .action = a, .params = p};
    tape.tanh_ratio = std::tanh(s.v / kSlipSpeed);
    const double f_t = -p.mu * kMass * kGravity * tape.tanh_ratio;
    EnvState next;
    next.v = s.v + p.dt * (a[0] * kMaxForce + f_t) / kMass;
    next.q = s.q + p.dt * next.v;
    next.t = s.t + 1;
    if (!IsFinite(next)) throw NonFiniteState("slider1d: integration blew up");
    tape.next_v = next.v;

    const double err = next.v - target_speed_;
    const double reward = -err * err - kActionCost * a[0] * a[0];
    return {next, reward, tape};
  }

  VjpResult<kActDim> Vjp(const Tape& tape, const StateCotangent& w,
                         double w_reward) const {
    const EnvParams& p = tape.params;
    const double err = tape.next_v - target_speed_;
    // total cotangent on v' from x' = x + dt v' and the reward
    const double wv = w.v + p.dt * w.q - w_reward * 2.0 * err;
    const double th = tape.tanh_ratio;
    const double dft_dv =
        -p.mu * kMass * kGravity * (1.0 - th * th) / kSlipSpeed;

    VjpResult<kActDim> out;
    out.state.q = w.q;
    out.state.v = wv * (1.0 + p.dt * dft_dv / kMass);
    out.action[0] = wv * p.dt * kMaxForce / kMass -
                    w_reward * 2.0 * kActionCost * tape.action[0];
    return out;
  }

  // [v, v_target - v]
  Observation Observe(const EnvState& s) const {
    return {s.v, target_speed_ - s.v};
  }

  StateCotangent ObserveVjp(const EnvState&, const Observation& w) const {
    return {0.0, w[0] - w[1]};
  }

  // x0 = 0 exactly, v0 ~ U[-0.5, 0.5] m/s
  EnvState Reset(std::uint64_t seed, const EnvParams&) const {
    Rng rng = MakeRng({kTagReset, seed});
    std::uniform_real_distribution<double> speed(-0.5, 0.5);
    EnvState s;
    s.q = 0.0;
    s.v = speed(rng);
    return s;
  }

 private:
  double target_speed_;
};

static_assert(DifferentiableEnv<Slider1D>);

}  // namespace rl_lab::diffsim

#endif  // RL_LAB_DIFFSIM_SLIDER1D_H_
