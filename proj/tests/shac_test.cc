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


#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "rl_lab/diffsim/bouncer1d.h"
#include "rl_lab/diffsim/slider1d.h"
#include "rl_lab/nets/policy.h"
#include "rl_lab/optim/asam.h"
#include "rl_lab/shac/losses.h"
#include "rl_lab/shac/rollout.h"
#include "rl_lab/shac/trainer.h"
#include "oracles.h"
#include "test_util.h"

namespace rl_lab::shac {
namespace {

using diffsim::Bouncer1D;
using diffsim::EnvParams;
using diffsim::Slider1D;
using nets::CriticNet;
using nets::PolicyNet;
using testing::RelErr;
using testing::TdLambdaOracle;
using testing::Uniform;

CriticNet ConstantCritic(double value) {
  CriticNet c(2, {4});
  c.params().SetZero();
  c.params().view("out.bias")[0] = value;
  return c;
}

ShacConfig SmallConfig() {
  ShacConfig cfg;
  cfg.num_envs = 4;
  cfg.horizon = 8;
  cfg.episodes = 3;
  cfg.critic_epochs = 4;
  cfg.eval_rollouts = 2;
  cfg.eval_interval = 1;
  cfg.hidden = {16, 16};
  return cfg;
}

TEST(TdLambda, WorkedExample) {
  const std::vector<double> r = {1.0, 1.0, 1.0};
  const std::vector<double> v = {0.0, 0.0, 2.0};
  const std::vector<double> oracle = TdLambdaOracle(r, v, false, 0.9, 0.5);
  // G1 = 1, G2 = 1.9, G3 = 1 + 0.9 + 0.81 + 0.729 * 2 = 4.168
  EXPECT_NEAR(oracle[0], 0.5 * 1.0 + 0.25 * 1.9 + 0.25 * 4.168, 1e-12);
  EXPECT_NEAR(TdLambdaSegment(r, v, false, 0.9, 0.5)[0], 2.017, 1e-12);
}

TEST(TdLambda, MatchesBruteForceOnRandomSegments) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 16);
    std::vector<double> r(n), v(n);
    for (int i = 0; i < n; ++i) {
      r[i] = Uniform(rng, -3.0, 3.0);
      v[i] = Uniform(rng, -10.0, 10.0);
    }
    const bool term = rng() % 4 == 0;
    const double gamma = Uniform(rng, 0.5, 1.0);
    const double lambda = Uniform(rng, 0.0, 1.0);
    const std::vector<double> got = TdLambdaSegment(r, v, term, gamma, lambda);
    const std::vector<double> want = TdLambdaOracle(r, v, term, gamma, lambda);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(got[i], want[i], 1e-12 * (1.0 + std::fabs(want[i])));
    }
  }
}

TEST(TdLambda, LimitsCollapse) {
  const std::vector<double> r = {0.5, -1.0, 2.0, 0.25};
  const std::vector<double> v = {3.0, 1.0, -2.0, 4.0};
  const double g = 0.95;
  const std::vector<double> one_step = TdLambdaSegment(r, v, false, g, 0.0);
  for (int t = 0; t < 4; ++t) EXPECT_NEAR(one_step[t], r[t] + g * v[t], 1e-14);

  const std::vector<double> full = TdLambdaSegment(r, v, false, g, 1.0);
  for (int t = 0; t < 4; ++t) {
    double ret = 0.0;
    for (int l = t; l < 4; ++l) ret += std::pow(g, l - t) * r[l];
    EXPECT_NEAR(full[t], ret + std::pow(g, 4 - t) * v[3], 1e-13);
  }
}

TEST(TdLambda, BatchTargetsFollowSegments) {
  Bouncer1D env;
  EnvParams params = Bouncer1D::DefaultParams();
  params.horizon = 5;  // several resets inside an 8-step window
  PolicyNet policy(2, 1, {8});
  policy.Initialize(3);
  CriticNet critic(2, {8});
  critic.Initialize(3);
  std::vector<LaneState> lanes = InitLanes(env, params, 3, 3);
  const HorizonBatch<Bouncer1D> batch = Rollout(env, params, policy, lanes, 8);
  const std::vector<double> got =
      TdLambdaTargets(env, batch, critic, 0.9, 0.7);

  for (int i = 0; i < batch.num_lanes; ++i) {
    std::vector<double> r, v;
    int start = 0;
    for (int k = 0; k < batch.horizon; ++k) {
      const auto& tr = batch.at(i, k);
      r.push_back(tr.reward);
      v.push_back(critic.Forward(env.Observe(tr.next_state)));
      if (k == batch.horizon - 1 || tr.episode_end) {
        const std::vector<double> want =
            TdLambdaOracle(r, v, tr.terminated, 0.9, 0.7);
        for (std::size_t t = 0; t < want.size(); ++t) {
          EXPECT_NEAR(got[i * batch.horizon + start + t], want[t], 1e-12);
        }
        r.clear();
        v.clear();
        start = k + 1;
      }
    }
  }
}

TEST(Rollout, SingleStepShape) {
  Bouncer1D env;
  const EnvParams params = Bouncer1D::DefaultParams();
  PolicyNet policy(2, 1);
  policy.Initialize(1);
  std::vector<LaneState> lanes = InitLanes(env, params, 1, 1);
  const HorizonBatch<Bouncer1D> b = Rollout(env, params, policy, lanes, 1);
  EXPECT_EQ(b.steps.size(), 1u);
  EXPECT_EQ(b.policy_tapes.size(), 1u);
  EXPECT_EQ(b.env_steps(), 1);
  EXPECT_TRUE(b.SegmentEnd(0, 0));
  EXPECT_EQ(b.steps[0].next_state.t, 1);
  EXPECT_EQ(lanes[0].state, b.steps[0].next_state);
}

TEST(Rollout, IsDeterministicAndContinuesLanes) {
  Slider1D env;
  const EnvParams params = Slider1D::DefaultParams();
  PolicyNet policy(2, 1);
  policy.Initialize(2);
  auto run = [&] {
    std::vector<LaneState> lanes = InitLanes(env, params, 9, 4);
    auto first = Rollout(env, params, policy, lanes, 6);
    auto second = Rollout(env, params, policy, lanes, 6);
    return std::make_pair(std::move(first), std::move(second));
  };
  const auto a = run();
  const auto b = run();
  for (std::size_t s = 0; s < a.first.steps.size(); ++s) {
    EXPECT_EQ(a.first.steps[s].action, b.first.steps[s].action);
    EXPECT_EQ(a.second.steps[s].next_state, b.second.steps[s].next_state);
  }
  // the second window starts where the first ended
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a.second.at(i, 0).state, a.first.at(i, 5).next_state);
  }
}

TEST(PolicyObjective, WorkedExample) {
  Bouncer1D env;
  HorizonBatch<Bouncer1D> batch;
  batch.num_lanes = 1;
  batch.horizon = 1;
  batch.steps.resize(1);
  batch.steps[0].reward = 1.0;
  batch.steps[0].next_state = {0.5, 0.0, 1};
  const CriticNet critic = ConstantCritic(2.0);
  PolicyObjective<Bouncer1D> obj(env, batch, critic, 0.99);
  EXPECT_NEAR(obj.loss(), -2.98, 1e-12);
}

TEST(PolicyObjective, ZeroRewardsAndValuesGiveZeroLoss) {
  Bouncer1D env;
  HorizonBatch<Bouncer1D> batch;
  batch.num_lanes = 2;
  batch.horizon = 3;
  batch.steps.resize(6);
  PolicyObjective<Bouncer1D> obj(env, batch, ConstantCritic(0.0), 1.0);
  EXPECT_EQ(obj.loss(), 0.0);
}

// With h = H, V = 0 and no terminations the objective is the negated mean
// discounted return, scaled by 1/H.
TEST(PolicyObjective, FullHorizonEqualsDiscountedReturn) {
  Slider1D env;
  EnvParams params = Slider1D::DefaultParams();
  params.horizon = 20;
  PolicyNet policy(2, 1, {8});
  policy.Initialize(4);
  std::vector<LaneState> lanes = InitLanes(env, params, 4, 3);
  const std::vector<diffsim::EnvState> starts = {
      lanes[0].state, lanes[1].state, lanes[2].state};
  const auto batch = Rollout(env, params, policy, lanes, 20);
  const double gamma = 0.97;
  PolicyObjective<Slider1D> obj(env, batch, ConstantCritic(0.0), gamma);

  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    diffsim::EnvState s = starts[i];
    double disc = 1.0;
    for (int k = 0; k < 20; ++k) {
      auto res = env.Step(s, batch.at(i, k).action, params);
      total += disc * res.reward;
      disc *= gamma;
      s = res.next;
    }
  }
  EXPECT_LT(RelErr(obj.loss(), -total / (3.0 * 20.0)), 1e-12);
}

// Central differences re-run the rollout from copied lanes, so the noise
// draws and initial states are identical.
TEST(PolicyObjective, GradientMatchesFiniteDifferences) {
  Bouncer1D env;
  const EnvParams params = Bouncer1D::DefaultParams();
  PolicyNet policy(2, 1);
  policy.Initialize(5);
  CriticNet critic(2);
  critic.Initialize(5);
  const std::vector<LaneState> lanes0 = InitLanes(env, params, 5, 2);

  auto loss_at = [&](const PolicyNet& p) {
    std::vector<LaneState> lanes = lanes0;
    const auto batch = Rollout(env, params, p, lanes, 4);
    return PolicyObjective<Bouncer1D>(env, batch, critic, 0.99).loss();
  };

  std::vector<LaneState> lanes = lanes0;
  const auto batch = Rollout(env, params, policy, lanes, 4);
  for (const auto& tr : batch.steps) {
    ASSERT_FALSE(tr.step_tape->in_contact);
    ASSERT_LT(std::fabs(tr.action[0]), 1.0);
  }
  PolicyObjective<Bouncer1D> obj(env, batch, critic, 0.99);
  const ParamVector grad = obj.Gradient(policy, batch.policy_tapes);

  double num = 0.0, den = 0.0;
  PolicyNet probe = policy;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double x0 = probe.params()[i];
    const double fd = testing::CentralDiff(
        [&](double x) {
          probe.params()[i] = x;
          return loss_at(probe);
        },
        x0);
    probe.params()[i] = x0;
    num += (grad[i] - fd) * (grad[i] - fd);
    den += fd * fd;
  }
  ASSERT_GT(den, 0.0);
  EXPECT_LT(std::sqrt(num / den), 1e-4);
}

TEST(PolicyObjective, ZeroPerturbationReplaysBitIdentically) {
  Bouncer1D env;
  const EnvParams params = Bouncer1D::DefaultParams();
  PolicyNet policy(2, 1);
  policy.Initialize(6);
  CriticNet critic(2);
  critic.Initialize(6);
  std::vector<LaneState> lanes = InitLanes(env, params, 6, 4);
  const auto batch = Rollout(env, params, policy, lanes, 8);
  PolicyObjective<Bouncer1D> obj(env, batch, critic, 0.99);
  const ParamVector g = obj.Gradient(policy, batch.policy_tapes);

  const optim::Perturbation pert =
      optim::AsamPerturb(policy.params(), g, {.rho = 0.0});
  PolicyNet perturbed = policy;
  perturbed.params() += pert.epsilon;
  const ParamVector g2 = obj.Gradient(perturbed, obj.Replay(perturbed));
  EXPECT_TRUE(g == g2);
}

TEST(Critic, FitLeavesExactTargetsUntouched) {
  CriticNet critic(2, {8});
  critic.Initialize(7);
  const std::vector<double> obs = {0.1, 0.2, -0.3, 0.4, 1.5, -0.6};
  std::vector<double> targets(3);
  for (int s = 0; s < 3; ++s) {
    targets[s] = critic.Forward(std::span<const double>(obs).subspan(2 * s, 2));
  }
  const ParamVector before = critic.params();
  optim::Adam opt(critic.params(), 1e-2);
  EXPECT_EQ(FitCritic(critic, opt, obs, 2, targets, 5), 0.0);
  EXPECT_TRUE(critic.params() == before);
}

TEST(Critic, SingleStateFitConverges) {
  CriticNet critic(2, {8});
  critic.Initialize(8);
  const std::vector<double> obs = {0.3, -0.2};
  const std::vector<double> target = {5.0};
  optim::Adam opt(critic.params(), 1e-2);
  const double initial = CriticLoss(critic, obs, 2, target);
  double prev = initial;
  bool approaching = true;  // Adam's momentum may overshoot near the optimum
  for (int e = 0; e < 300; ++e) {
    const double before = CriticLoss(critic, obs, 2, target);
    EXPECT_EQ(FitCritic(critic, opt, obs, 2, target, 1), before);
    const double after = CriticLoss(critic, obs, 2, target);
    if (approaching) {
      EXPECT_LE(after, prev) << "epoch " << e;
    }
    if (after < 1e-3 * initial) approaching = false;
    prev = after;
  }
  EXPECT_FALSE(approaching);
  EXPECT_NEAR(critic.Forward(obs), 5.0, 1e-2);
}

TEST(Critic, LossIsMeanSquaredResidual) {
  CriticNet critic(2, {8});
  critic.Initialize(9);
  const std::vector<double> obs = {0.1, 0.2, -0.3, 0.4};
  const std::vector<double> targets = {1.0, -2.0};
  double expect = 0.0;
  for (int s = 0; s < 2; ++s) {
    const double r = critic.Forward(std::span<const double>(obs).subspan(2 * s, 2)) -
                     targets[s];
    expect += r * r / 2.0;
  }
  EXPECT_DOUBLE_EQ(CriticLoss(critic, obs, 2, targets), expect);
}

TEST(TargetMix, Endpoints) {
  CriticNet critic(2, {4}), target(2, {4});
  critic.Initialize(1);
  target.Initialize(2);
  CriticNet same = target;
  TargetMix(same, critic, 1.0);
  EXPECT_TRUE(same.params() == target.params());
  TargetMix(same, critic, 0.0);
  EXPECT_TRUE(same.params() == critic.params());

  CriticNet a = ConstantCritic(0.0), b = ConstantCritic(2.0);
  TargetMix(a, b, 0.5);
  EXPECT_EQ(a.params().view("out.bias")[0], 1.0);
}

TEST(TargetMix, ContractsTowardCritic) {
  std::mt19937_64 rng(10);
  for (double alpha : {0.0, 0.3, 0.95}) {
    CriticNet critic(2, {4}), target(2, {4});
    critic.Initialize(rng());
    target.Initialize(rng());
    const double before = (target.params() - critic.params()).Norm2();
    TargetMix(target, critic, alpha);
    const double after = (target.params() - critic.params()).Norm2();
    EXPECT_NEAR(after, alpha * before, 1e-12 * before);
  }
}

TEST(Trainer, SampleAccountingAndGradEvals) {
  for (Mode mode : {Mode::kPlain, Mode::kAsam}) {
    ShacConfig cfg = SmallConfig();
    cfg.mode = mode;
    ShacTrainer<Bouncer1D> trainer(Bouncer1D{}, Bouncer1D::DefaultParams(),
                                   cfg, 1);
    const std::vector<CurveRow> rows = trainer.Train();
    ASSERT_EQ(rows.size(), 3u);
    const int per_update = mode == Mode::kPlain ? 1 : 2;
    for (int m = 1; m <= 3; ++m) {
      EXPECT_EQ(rows[m - 1].episode, m);
      EXPECT_EQ(rows[m - 1].env_steps, m * cfg.num_envs * cfg.horizon);
      EXPECT_EQ(rows[m - 1].grad_evals, m * per_update);
    }
  }
}

TEST(Trainer, VanishingRhoTracksPlainShac) {
  ShacConfig plain_cfg = SmallConfig();
  ShacConfig asam_cfg = plain_cfg;
  asam_cfg.mode = Mode::kAsam;
  asam_cfg.asam.rho = 1e-12;
  ShacTrainer<Slider1D> plain(Slider1D{}, Slider1D::DefaultParams(),
                              plain_cfg, 2);
  ShacTrainer<Slider1D> asam(Slider1D{}, Slider1D::DefaultParams(), asam_cfg,
                             2);
  plain.Train();
  asam.Train();
  const ParamVector diff = plain.policy().params() - asam.policy().params();
  double worst = 0.0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    worst = std::max(worst, std::fabs(diff[i]));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Trainer, FixedSeedIsBitReproducible) {
  auto run = [] {
    ShacConfig cfg = SmallConfig();
    cfg.mode = Mode::kAsam;
    ShacTrainer<Bouncer1D> t(Bouncer1D{}, Bouncer1D::DefaultParams(), cfg, 3);
    return std::make_pair(t.Train(), t.policy().params());
  };
  const auto a = run();
  const auto b = run();
  EXPECT_TRUE(a.second == b.second);
  for (std::size_t m = 0; m < a.first.size(); ++m) {
    EXPECT_EQ(a.first[m].eval_reward_mean, b.first[m].eval_reward_mean);
    EXPECT_EQ(a.first[m].policy_loss, b.first[m].policy_loss);
    EXPECT_EQ(a.first[m].critic_loss, b.first[m].critic_loss);
  }
}

// Every step of this environment reports a non-finite state.
struct ExplodingSlider : Slider1D {
  diffsim::StepResult<Tape> Step(const diffsim::EnvState&, const Action&,
                                 const EnvParams&) const {
    throw diffsim::NonFiniteState("boom");
  }
};

TEST(Trainer, AbortsOnRepeatedNonFiniteStates) {
  ShacConfig cfg = SmallConfig();
  ShacTrainer<ExplodingSlider> t(ExplodingSlider(), Slider1D::DefaultParams(),
                                 cfg, 4);
  EXPECT_THROW(t.TrainEpisode(), TrainingAborted);
}

TEST(Trainer, RejectsBadConfig) {
  ShacConfig cfg = SmallConfig();
  cfg.horizon = 1000;
  EXPECT_THROW(ShacTrainer<Bouncer1D>(Bouncer1D{}, Bouncer1D::DefaultParams(),
                                      cfg, 1),
               std::invalid_argument);
  cfg = SmallConfig();
  cfg.mode = Mode::kAsam;
  cfg.asam.rho = 0.0;
  EXPECT_THROW(ShacTrainer<Bouncer1D>(Bouncer1D{}, Bouncer1D::DefaultParams(),
                                      cfg, 1),
               std::invalid_argument);
}

}  // namespace
}  // namespace rl_lab::shac
