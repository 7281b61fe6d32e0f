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

// Differentiable environment contract: a step function s' = F(s, a) with a
// scalar reward, plus the vector-Jacobian products of both with respect to
// the input state and action.

#ifndef RL_LAB_DIFFSIM_ENV_H_
#define RL_LAB_DIFFSIM_ENV_H_

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rl_lab::diffsim {

inline constexpr double kGravity = 9.81;  // m/s^2

// Single degree of freedom: q in m, v in m/s, t in steps.
struct EnvState {
  double q = 0.0;
  double v = 0.0;
  int t = 0;

  bool operator==(const EnvState&) const = default;
};

// cotangent over (q, v); t is not differentiable
struct StateCotangent {
  double q = 0.0;
  double v = 0.0;
};

// Perturbable physical parameters of one environment instance.
struct EnvParams {
  double k_e = 400.0;  // contact stiffness, N/m
  double k_d = 10.0;   // contact damping, N*s/m
  double mu = 0.5;     // Coulomb friction coefficient
  double dt = 0.01;    // integration step, s
  int horizon = 240;   // full episode length, steps

  bool operator==(const EnvParams&) const = default;
};

inline void ValidateParams(const EnvParams& p) {
  if (!(p.k_e > 0.0)) throw std::invalid_argument("k_e must be > 0");
  if (!(p.k_d >= 0.0)) throw std::invalid_argument("k_d must be >= 0");
  if (!(p.mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  if (!(p.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (p.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
}

// Integration produced NaN/Inf; the caller aborts the episode.
class NonFiniteState : public std::runtime_error {
 public:
  explicit NonFiniteState(const std::string& what) : std::runtime_error(what) {}
};

inline bool IsFinite(const EnvState& s) {
  return std::isfinite(s.q) && std::isfinite(s.v);
}

template <class Tape>
struct StepResult {
  EnvState next;
  double reward = 0.0;
  Tape tape;
};

template <int ActDim>
struct VjpResult {
  StateCotangent state;
  std::array<double, ActDim> action{};
};

// Subgradient convention for max(0, z): derivative at z = 0 is 0.
constexpr bool ReluActive(double z) { return z > 0.0; }

template <class E>
concept DifferentiableEnv =
    requires(const E& env, const EnvState& s, const typename E::Action& a,
             const EnvParams& p, const typename E::Tape& tape,
             const StateCotangent& w, const typename E::Observation& w_obs,
             std::uint64_t seed) {
      { E::kName } -> std::convertible_to<std::string_view>;
      { E::kObsDim } -> std::convertible_to<int>;
      { E::kActDim } -> std::convertible_to<int>;
      { E::DefaultParams() } -> std::same_as<EnvParams>;
      { env.Step(s, a, p) } -> std::same_as<StepResult<typename E::Tape>>;
      { env.Vjp(tape, w, 0.0) } -> std::same_as<VjpResult<E::kActDim>>;
      { env.Observe(s) } -> std::same_as<typename E::Observation>;
      { env.ObserveVjp(s, w_obs) } -> std::same_as<StateCotangent>;
      { env.Reset(seed, p) } -> std::same_as<EnvState>;
    };

namespace internal {

template <std::size_t N>
void CheckAction(const std::array<double, N>& a) {
  for (double x : a) {
    if (!(x >= -1.0 && x <= 1.0)) {
      throw std::domain_error("action component outside [-1, 1]: " +
                              std::to_string(x));
    }
  }
}

inline void CheckState(const EnvState& s) {
  if (!IsFinite(s)) throw NonFiniteState("non-finite input state");
}

}  // namespace internal

}  // namespace rl_lab::diffsim

#endif  // RL_LAB_DIFFSIM_ENV_H_
