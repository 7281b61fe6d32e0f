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
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rl_lab/common/episode.h"
#include "rl_lab/common/parallel.h"
#include "rl_lab/diffsim/bouncer1d.h"
#include "rl_lab/diffsim/slider1d.h"
#include "rl_lab/robust/evaluate.h"
#include "rl_lab/robust/heatmap_svg.h"
#include "rl_lab/robust/noise.h"
#include "rl_lab/robust/studies.h"
#include "rl_lab/robust/sweep.h"
#include "test_util.h"

namespace rl_lab::robust {
namespace {

using diffsim::Bouncer1D;
using diffsim::EnvParams;
using diffsim::Slider1D;
using nets::PolicyNet;
using testing::Uniform;

PolicyNet MakePolicy(std::uint64_t seed, double head_boost = 1.0) {
  PolicyNet p(2, 1, {16, 16});
  p.Initialize(seed);
  // larger head so actions vary visibly across states
  for (double& w : p.params().view("out.weight")) w *= head_boost;
  return p;
}

std::vector<PolicyEntry> Entries(int per_algo) {
  std::vector<PolicyEntry> out;
  for (const char* algo : {"ppo", "shac"}) {
    for (int k = 0; k < per_algo; ++k) {
      out.push_back({algo, static_cast<std::uint64_t>(k), k,
                     MakePolicy(100 * (algo[0] == 's') + k, 50.0)});
    }
  }
  return out;
}

TEST(InjectNoise, WorkedExamples) {
  EXPECT_EQ(InjectNoise(1.5, 0.5, -1.0), 0.0);
  EXPECT_EQ(InjectNoise(1.5, 0.0, 0.3), 1.0);
  EXPECT_EQ(InjectNoise(-0.4, 0.0, 0.9), -0.4);
  EXPECT_EQ(InjectNoise(-7.0, 1.0, 0.25), 0.25);
  EXPECT_EQ(InjectNoise(std::vector<double>{2.0, -0.5}, 0.5,
                        std::vector<double>{0.0, 0.5}),
            (std::vector<double>{0.5, 0.0}));
}

TEST(InjectNoise, ContractOnRandomTriples) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000000; ++i) {
    const double a = Uniform(rng, -5.0, 5.0);
    const double lambda = Uniform(rng, 0.0, 1.0);
    const double draw = Uniform(rng, -1.0, 1.0);
    const double out = InjectNoise(a, lambda, draw);
    ASSERT_GE(out, -1.0);
    ASSERT_LE(out, 1.0);
    ASSERT_EQ(InjectNoise(a, 0.0, draw), std::clamp(a, -1.0, 1.0));
    ASSERT_EQ(InjectNoise(a, 1.0, draw), draw);
  }
}

TEST(InjectNoise, ExpectedMagnitudeGrowsWithLambda) {
  // zero policy: a = 0, so E|a'| = lambda / 2
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  double prev = -1.0;
  for (double lambda : DefaultLambdaGrid()) {
    Rng rng = NoiseStream(9, 0, static_cast<int>(lambda * 100));
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
      sum += std::fabs(InjectNoise(0.0, lambda, uniform(rng)));
    }
    const double mean = sum / 10000.0;
    EXPECT_GE(mean, prev) << "lambda " << lambda;
    EXPECT_NEAR(mean, lambda / 2.0, 0.01);
    prev = mean;
  }
}

TEST(InjectNoise, RejectsOutOfRangeLambda) {
  EXPECT_THROW(ValidateNoise({1.5, 0}), std::invalid_argument);
  EXPECT_THROW(ValidateNoise({-0.1, 0}), std::invalid_argument);
}

TEST(EvalPolicy, ZeroNoiseReproducesCleanEvaluation) {
  Bouncer1D env;
  const EnvParams params = Bouncer1D::DefaultParams();
  const PolicyNet policy = MakePolicy(2, 50.0);
  const EvalRecord rec = EvalPolicy(env, params, policy, {0.0, 77}, 6, 0);
  const MeanStd clean = EvaluateClean(env, params, policy, 6);
  EXPECT_EQ(rec.mean_reward, clean.mean);
  EXPECT_EQ(rec.std_reward, clean.std);
  EXPECT_EQ(rec.failures, 0);
}

TEST(EvalPolicy, StatisticsFollowRetainedRewards) {
  Slider1D env;
  const EnvParams params = Slider1D::DefaultParams();
  const PolicyNet policy = MakePolicy(3, 50.0);
  const EvalRecord one = EvalPolicy(env, params, policy, {0.3, 1}, 1, 0);
  EXPECT_EQ(one.std_reward, 0.0);
  EXPECT_EQ(one.rewards.size(), 1u);

  const EvalRecord rec = EvalPolicy(env, params, policy, {0.3, 1}, 9, 0);
  ASSERT_EQ(rec.rewards.size(), 9u);
  double sum = 0.0;
  for (double r : rec.rewards) sum += r;
  EXPECT_NEAR(rec.mean_reward, sum / 9.0, 1e-12);
  double ss = 0.0;
  for (double r : rec.rewards) ss += (r - sum / 9.0) * (r - sum / 9.0);
  EXPECT_NEAR(rec.std_reward, std::sqrt(ss / 9.0), 1e-12);
  EXPECT_GT(rec.std_reward, 0.0);
}

TEST(EvalPolicy, NoiseChangesOutcomeAndIsReproducible) {
  Bouncer1D env;
  const EnvParams params = Bouncer1D::DefaultParams();
  const PolicyNet policy = MakePolicy(4, 50.0);
  const EvalRecord a = EvalPolicy(env, params, policy, {0.3, 5}, 4, 0);
  const EvalRecord b = EvalPolicy(env, params, policy, {0.3, 5}, 4, 0);
  const EvalRecord c = EvalPolicy(env, params, policy, {0.3, 6}, 4, 0);
  EXPECT_EQ(a.rewards, b.rewards);
  EXPECT_NE(a.rewards, c.rewards);
}

// Reports a non-finite state once the episode reaches step 5.
struct FragileSlider : Slider1D {
  diffsim::StepResult<Tape> Step(const diffsim::EnvState& s, const Action& a,
                                 const EnvParams& p) const {
    if (s.t >= 5) throw diffsim::NonFiniteState("fragile");
    return Slider1D::Step(s, a, p);
  }
};

TEST(EvalPolicy, FailedEpisodesKeepPartialReturn) {
  FragileSlider env;
  const EnvParams params = Slider1D::DefaultParams();
  const PolicyNet policy = MakePolicy(5);
  const EvalRecord rec = EvalPolicy(env, params, policy, {0.0, 0}, 3, 0);
  EXPECT_EQ(rec.failures, 3);
  for (int r = 0; r < 3; ++r) {
    diffsim::EnvState s = env.Reset(EvalInitSeed(0, r), params);
    double total = 0.0;
    for (int t = 0; t < 5; ++t) {
      const auto a = ClipAction<1>(policy.Mean(env.Observe(s)));
      const auto res = env.Slider1D::Step(s, a, params);
      total += res.reward;
      s = res.next;
    }
    EXPECT_EQ(rec.rewards[r], total);
  }
}

TEST(NoiseSweep, ShapeOrderAndComposition) {
  Bouncer1D env;
  const EnvParams params = Bouncer1D::DefaultParams();
  const std::vector<PolicyEntry> entries = Entries(3);
  const std::vector<double> lambdas = DefaultLambdaGrid();
  const std::vector<EvalRecord> rows =
      NoiseSweep(env, params, entries, lambdas, 2, 11);
  ASSERT_EQ(rows.size(), 2u * 3u * 11u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const PolicyEntry& e = entries[i / 11];
    EXPECT_EQ(rows[i].algorithm, e.algorithm);
    EXPECT_EQ(rows[i].policy_seed, e.seed);
    EXPECT_EQ(rows[i].noise.lambda_mix, lambdas[i % 11]);
  }
  const EvalRecord standalone =
      EvalPolicy(env, params, entries[4].policy, {lambdas[7], 11}, 2, 0,
                 entries[4].slot);
  EXPECT_EQ(rows[4 * 11 + 7].rewards, standalone.rewards);
}

TEST(NoiseSweep, PairedNoiseAcrossAlgorithms) {
  Slider1D env;
  const EnvParams params = Slider1D::DefaultParams();
  const PolicyNet shared = MakePolicy(6, 50.0);
  const std::vector<PolicyEntry> entries = {{"shac", 1, 0, shared},
                                            {"shac-asam", 9, 0, shared}};
  const auto rows = NoiseSweep(env, params, entries, {0.4}, 5, 3);
  EXPECT_EQ(rows[0].rewards, rows[1].rewards);
}

TEST(NoiseSweep, IndependentOfWorkerCount) {
  Bouncer1D env;
  const EnvParams params = Bouncer1D::DefaultParams();
  const std::vector<PolicyEntry> entries = Entries(2);
  setenv("RL_LAB_THREADS", "1", 1);
  const auto serial = NoiseSweep(env, params, entries, {0.0, 0.2}, 3, 4);
  setenv("RL_LAB_THREADS", "4", 1);
  const auto parallel = NoiseSweep(env, params, entries, {0.0, 0.2}, 3, 4);
  unsetenv("RL_LAB_THREADS");
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].rewards, parallel[i].rewards);
  }
}

TEST(SweepGrid, DefaultsAndValidation) {
  const SweepGrid b = DefaultGrid("bouncer1d");
  EXPECT_EQ(b.cell_count(), 30u);
  const SweepGrid s = DefaultGrid("slider1d");
  EXPECT_EQ(s.cell_count(), 10u);
  EXPECT_NO_THROW(ValidateGrid(b, "bouncer1d"));
  EXPECT_THROW(ValidateGrid(s, "bouncer1d"), std::invalid_argument);
  EXPECT_THROW(ValidateGrid(b, "slider1d"), std::invalid_argument);
  SweepGrid bad;
  bad.axes = {{Axis::kKe, {100, 100}}};
  EXPECT_THROW(ValidateGrid(bad, "bouncer1d"), std::invalid_argument);
  bad.axes = {{Axis::kKe, {}}};
  EXPECT_THROW(ValidateGrid(bad, "bouncer1d"), std::invalid_argument);
}

TEST(SweepGrid, FirstAxisVariesSlowest) {
  const SweepGrid g = DefaultGrid("bouncer1d");
  const EnvParams base = Bouncer1D::DefaultParams();
  const EnvParams c7 = g.CellParams(base, 7);  // row 1, column 2
  EXPECT_EQ(c7.k_e, 200.0);
  EXPECT_EQ(c7.k_d, 10.0);
  EXPECT_EQ(c7.mu, base.mu);
  EXPECT_EQ(c7.horizon, base.horizon);
}

TEST(ParamSweep, SingleCellAtTrainingParamsEqualsCleanEvaluation) {
  Bouncer1D env;
  const EnvParams params = Bouncer1D::DefaultParams();
  SweepGrid g;
  g.axes = {{Axis::kKe, {params.k_e}}, {Axis::kKd, {params.k_d}}};
  g.rollouts_per_cell = 5;
  const std::vector<PolicyEntry> entries = {{"shac", 0, 0, MakePolicy(7, 50)}};
  const auto rows = ParamSweep(env, params, entries, g);
  ASSERT_EQ(rows.size(), 1u);
  const MeanStd clean = EvaluateClean(env, params, entries[0].policy, 5);
  EXPECT_EQ(rows[0].mean_reward, clean.mean);
  EXPECT_EQ(rows[0].std_reward, clean.std);
}

TEST(ParamSweep, FrictionCurveShape) {
  Slider1D env;
  SweepGrid g = DefaultGrid("slider1d");
  g.rollouts_per_cell = 2;
  const auto entries = Entries(1);
  const auto rows = ParamSweep(env, Slider1D::DefaultParams(), entries, g);
  ASSERT_EQ(rows.size(), 20u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(rows[i].params.mu, 0.1 * static_cast<double>(i % 10 + 1),
                1e-12);
  }
}

TEST(Heatmap, AveragesPoliciesAndRendersDeterministically) {
  Bouncer1D env;
  SweepGrid g = DefaultGrid("bouncer1d");
  g.rollouts_per_cell = 1;
  const auto entries = Entries(2);
  const auto rows = ParamSweep(env, Bouncer1D::DefaultParams(), entries, g);
  ASSERT_EQ(rows.size(), 4u * 30u);
  const HeatmapMatrix m = MakeHeatmap(rows, g, "shac");
  ASSERT_EQ(m.values.size(), 6u);
  ASSERT_EQ(m.values[0].size(), 5u);
  // shac rows come after the two ppo policies
  EXPECT_NEAR(m.values[2][3],
              (rows[60 + 13].mean_reward + rows[90 + 13].mean_reward) / 2.0,
              1e-12);
  EXPECT_THROW(MakeHeatmap(rows, g, "nope"), std::invalid_argument);

  const std::string a = HeatmapSvg(m, -10.0, 2000.0, "shac");
  const std::string b = HeatmapSvg(m, -10.0, 2000.0, "shac");
  EXPECT_EQ(a, b);
  std::size_t rects = 0;
  for (std::size_t p = a.find("<rect"); p != std::string::npos;
       p = a.find("<rect", p + 1)) {
    ++rects;
  }
  EXPECT_GE(rects, 30u);
  EXPECT_NE(a.find("k_e"), std::string::npos);
  EXPECT_NE(a.find("k_d"), std::string::npos);
}

RunCurve Synthetic(const std::string& algo, std::uint64_t seed, double ms,
                   int evals_per_update, int updates) {
  RunCurve rc{algo, seed, {}};
  for (int u = 1; u <= updates; ++u) {
    CurveRow row;
    row.episode = u;
    row.grad_evals = static_cast<std::int64_t>(u) * evals_per_update;
    row.update_wall_ms = ms;
    rc.rows.push_back(row);
  }
  return rc;
}

TEST(OverheadReport, RatiosAgainstPlainShac) {
  const auto report = OverheadReport({Synthetic("shac-asam", 0, 4.0, 2, 10),
                                      Synthetic("shac", 0, 2.0, 1, 10),
                                      Synthetic("shac", 1, 2.0, 1, 10)});
  ASSERT_EQ(report.size(), 2u);
  EXPECT_EQ(report[0].algorithm, "shac");
  EXPECT_EQ(report[0].runs, 2);
  EXPECT_EQ(report[0].grad_eval_ratio, 1.0);
  EXPECT_EQ(report[0].wall_ratio, 1.0);
  EXPECT_EQ(report[1].algorithm, "shac-asam");
  EXPECT_EQ(report[1].grad_eval_ratio, 2.0);
  EXPECT_EQ(report[1].wall_ratio, 2.0);
  EXPECT_EQ(report[1].total_ms.mean, 40.0);
  EXPECT_EQ(report[1].total_ms.std, 0.0);  // single run
  EXPECT_EQ(report[1].updates, 10);
}

TEST(OverheadReport, RatiosUndefinedWithoutShac) {
  const auto report = OverheadReport({Synthetic("ppo", 0, 1.0, 16, 3)});
  EXPECT_TRUE(std::isnan(report[0].wall_ratio));
  EXPECT_EQ(report[0].grad_evals_per_update, 16.0);
}

TEST(RhoStudy, ShapeAndEqualBudgets) {
  shac::ShacConfig cfg;
  cfg.num_envs = 2;
  cfg.horizon = 4;
  cfg.episodes = 2;
  cfg.critic_epochs = 1;
  cfg.eval_rollouts = 1;
  cfg.hidden = {8};
  const auto groups = RhoStudy(Bouncer1D{}, Bouncer1D::DefaultParams(), cfg,
                               {0.05, 0.25, 0.75}, {1, 2}, {0.0, 0.3}, 2, 5);
  ASSERT_EQ(groups.size(), 3u);
  for (const RhoGroup& g : groups) {
    ASSERT_EQ(g.runs.size(), 2u);
    EXPECT_EQ(g.noise_rows.size(), 4u);
    for (const RhoRun& r : g.runs) {
      EXPECT_EQ(r.rho, g.rho);
      EXPECT_EQ(r.curve.back().env_steps, 2 * 2 * 4);
      EXPECT_EQ(r.curve.back().grad_evals, 4);
    }
  }
  EXPECT_THROW(RhoStudy(Bouncer1D{}, Bouncer1D::DefaultParams(), cfg, {0.1},
                        {1}, {0.0}, 1, 5),
               std::invalid_argument);
}

}  // namespace
}  // namespace rl_lab::robust
