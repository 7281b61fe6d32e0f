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

#ifndef RL_LAB_COMMON_LANES_H_
#define RL_LAB_COMMON_LANES_H_

#include <cstdint>
#include <random>
#include <vector>

#include "rl_lab/common/random.h"
#include "rl_lab/diffsim/env.h"

namespace rl_lab {

// One persistent simulation lane.  Trajectories continue from the previous
// window's final state until the episode ends, then the lane resets.
struct LaneState {
  diffsim::EnvState state;
  std::uint64_t stream = 0;
  std::uint64_t resets = 0;
  Rng noise_rng;
  std::normal_distribution<double> normal{0.0, 1.0};
};

template <diffsim::DifferentiableEnv Env>
diffsim::EnvState ResetLane(const Env& env, const diffsim::EnvParams& params,
                            LaneState& lane) {
  const std::uint64_t seed = StreamSeed({kTagLane, lane.stream, lane.resets});
  ++lane.resets;
  return env.Reset(seed, params);
}

template <diffsim::DifferentiableEnv Env>
std::vector<LaneState> InitLanes(const Env& env,
                                 const diffsim::EnvParams& params,
                                 std::uint64_t run_seed, int num_lanes) {
  std::vector<LaneState> lanes(num_lanes);
  for (int i = 0; i < num_lanes; ++i) {
    LaneState& lane = lanes[i];
    lane.stream = StreamSeed({run_seed, static_cast<std::uint64_t>(i)});
    lane.noise_rng = MakeRng({kTagNoise, lane.stream});
    lane.state = ResetLane(env, params, lane);
  }
  return lanes;
}

}  // namespace rl_lab

#endif  // RL_LAB_COMMON_LANES_H_
