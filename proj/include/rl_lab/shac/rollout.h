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

#ifndef RL_LAB_SHAC_ROLLOUT_H_
#define RL_LAB_SHAC_ROLLOUT_H_

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "rl_lab/common/episode.h"
#include "rl_lab/common/lanes.h"
#include "rl_lab/common/random.h"
#include "rl_lab/diffsim/env.h"
#include "rl_lab/nets/policy.h"

namespace rl_lab::shac {

using rl_lab::InitLanes;
using rl_lab::LaneState;
using rl_lab::ResetLane;

template <diffsim::DifferentiableEnv Env>
struct Transition {
  diffsim::EnvState state;
  typename Env::Observation obs{};
  typename Env::Action noise{};
  typename Env::Action action{};  // clipped, as applied
  std::optional<typename Env::Tape> step_tape;  // empty when the step failed
  diffsim::EnvState next_state;  // before any reset
  double reward = 0.0;
  bool episode_end = false;  // the lane resets after this step
  bool terminated = false;   // nothing is bootstrapped past this step

  bool failed() const { return !step_tape.has_value(); }
};

template <diffsim::DifferentiableEnv Env>
struct HorizonBatch {
  int num_lanes = 0;
  int horizon = 0;
  std::vector<Transition<Env>> steps;          // lane-major
  std::vector<nets::PolicyTape> policy_tapes;  // parallel to steps
  int lane_failures = 0;

  Transition<Env>& at(int lane, int k) { return steps[lane * horizon + k]; }
  const Transition<Env>& at(int lane, int k) const {
    return steps[lane * horizon + k];
  }
  // window ends here when the lane did not terminate or reset
  bool SegmentEnd(int lane, int k) const {
    return k == horizon - 1 || at(lane, k).episode_end;
  }
  bool SegmentStart(int lane, int k) const {
    return k == 0 || at(lane, k - 1).episode_end;
  }
  std::int64_t env_steps() const {
    return static_cast<std::int64_t>(steps.size());
  }
};

// Samples h steps on every lane with reparameterized policy noise.  Raw
// actions are clipped to [-1, 1] before stepping; a non-finite step ends
// the lane's episode as a termination and the lane resets.
template <diffsim::DifferentiableEnv Env>
HorizonBatch<Env> Rollout(const Env& env, const diffsim::EnvParams& params,
                          const nets::PolicyNet& policy,
                          std::vector<LaneState>& lanes, int horizon) {
  if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
  HorizonBatch<Env> batch;
  batch.num_lanes = static_cast<int>(lanes.size());
  batch.horizon = horizon;
  batch.steps.resize(lanes.size() * horizon);
  batch.policy_tapes.resize(lanes.size() * horizon);

  for (int i = 0; i < batch.num_lanes; ++i) {
    LaneState& lane = lanes[i];
    for (int k = 0; k < horizon; ++k) {
      Transition<Env>& tr = batch.at(i, k);
      nets::PolicyTape& tape = batch.policy_tapes[i * horizon + k];
      tr.state = lane.state;
      tr.obs = env.Observe(lane.state);
      for (int j = 0; j < Env::kActDim; ++j) {
        tr.noise[j] = lane.normal(lane.noise_rng);
      }
      const std::vector<double> raw = policy.Forward(tr.obs, tr.noise, &tape);
      tr.action = ClipAction<Env::kActDim>(raw);
      try {
        auto res = env.Step(lane.state, tr.action, params);
        tr.next_state = res.next;
        tr.reward = res.reward;
        tr.step_tape = std::move(res.tape);
        tr.episode_end = res.next.t >= params.horizon;
      } catch (const diffsim::NonFiniteState&) {
        tr.next_state = lane.state;
        tr.reward = 0.0;
        tr.episode_end = true;
        tr.terminated = true;
        ++batch.lane_failures;
      }
      lane.state = tr.episode_end ? ResetLane(env, params, lane)
                                  : tr.next_state;
    }
  }
  return batch;
}

}  // namespace rl_lab::shac

#endif  // RL_LAB_SHAC_ROLLOUT_H_
