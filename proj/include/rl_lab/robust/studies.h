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

#ifndef RL_LAB_ROBUST_STUDIES_H_
#define RL_LAB_ROBUST_STUDIES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rl_lab/common/episode.h"
#include "rl_lab/common/parallel.h"
#include "rl_lab/diffsim/env.h"
#include "rl_lab/nets/policy.h"
#include "rl_lab/robust/sweep.h"
#include "rl_lab/shac/trainer.h"

namespace rl_lab::robust {

inline constexpr double kReferenceRho = 0.75;

struct RhoRun {
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::vector<CurveRow> curve;
  nets::PolicyNet policy;
  nets::CriticNet critic;
  nets::CriticNet target_critic;
};

struct RhoGroup {
  double rho = 0.0;
  std::vector<RhoRun> runs;           // one per seed, in seed-list order
  std::vector<EvalRecord> noise_rows; // NoiseSweep over this group's policies
};

// Trains SHAC-ASAM once per (rho, seed) with otherwise identical settings,
// so every run has the same env-step budget, then noise-sweeps each group.
template <diffsim::DifferentiableEnv Env>
std::vector<RhoGroup> RhoStudy(const Env& env, const diffsim::EnvParams& params,
                               const shac::ShacConfig& base,
                               const std::vector<double>& rhos,
                               const std::vector<std::uint64_t>& seeds,
                               const std::vector<double>& lambdas,
                               int rollouts, std::uint64_t noise_seed,
                               std::uint64_t eval_seed = 0) {
  if (rhos.empty() || seeds.empty()) {
    throw std::invalid_argument("rho study needs rho values and seeds");
  }
  if (std::find(rhos.begin(), rhos.end(), kReferenceRho) == rhos.end()) {
    throw std::invalid_argument("rho list must include 0.75");
  }
  const std::size_t ns = seeds.size();
  std::vector<RhoRun> runs(rhos.size() * ns);
  ParallelFor(runs.size(), [&](std::size_t i) {
    shac::ShacConfig cfg = base;
    cfg.mode = shac::Mode::kAsam;
    cfg.asam.rho = rhos[i / ns];
    shac::ShacTrainer<Env> trainer(env, params, cfg, seeds[i % ns]);
    RhoRun& run = runs[i];
    run.rho = cfg.asam.rho;
    run.seed = seeds[i % ns];
    run.curve = trainer.Train();
    run.policy = trainer.policy();
    run.critic = trainer.critic();
    run.target_critic = trainer.target_critic();
  });

  std::vector<RhoGroup> groups(rhos.size());
  for (std::size_t g = 0; g < rhos.size(); ++g) {
    groups[g].rho = rhos[g];
    std::vector<PolicyEntry> entries;
    for (std::size_t s = 0; s < ns; ++s) {
      RhoRun& run = runs[g * ns + s];
      entries.push_back({"shac-asam", run.seed, static_cast<int>(s),
                         run.policy});
      groups[g].runs.push_back(std::move(run));
    }
    groups[g].noise_rows =
        NoiseSweep(env, params, entries, lambdas, rollouts, noise_seed,
                   eval_seed);
  }
  return groups;
}

// Learning curve of one finished run.
struct RunCurve {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<CurveRow> rows;
};

struct OverheadRow {
  std::string algorithm;
  int runs = 0;
  int updates = 0;  // per run; taken from the first run
  MeanStd total_ms;   // summed update time of a run
  MeanStd update_ms;  // mean time per update
  double grad_evals_per_update = 0.0;
  double wall_ratio = 0.0;       // update_ms relative to plain SHAC
  double grad_eval_ratio = 0.0;  // relative to plain SHAC
};

// Per-algorithm update cost over runs, sorted by algorithm name.  Ratios
// are NaN when no plain SHAC run is present.
inline std::vector<OverheadRow> OverheadReport(
    const std::vector<RunCurve>& runs) {
  std::map<std::string, std::vector<const RunCurve*>> by_algo;
  for (const RunCurve& r : runs) {
    if (r.rows.empty()) {
      throw std::invalid_argument("run " + r.algorithm + "/" +
                                  std::to_string(r.seed) + " has no rows");
    }
    by_algo[r.algorithm].push_back(&r);
  }
  std::vector<OverheadRow> out;
  for (const auto& [algo, list] : by_algo) {
    OverheadRow row;
    row.algorithm = algo;
    row.runs = static_cast<int>(list.size());
    row.updates = static_cast<int>(list.front()->rows.size());
    std::vector<double> totals, per_update;
    double evals = 0.0;
    for (const RunCurve* r : list) {
      double sum = 0.0;
      for (const CurveRow& c : r->rows) sum += c.update_wall_ms;
      totals.push_back(sum);
      per_update.push_back(sum / r->rows.size());
      evals += static_cast<double>(r->rows.back().grad_evals) /
               static_cast<double>(r->rows.size());
    }
    row.total_ms = ComputeMeanStd(totals);
    row.update_ms = ComputeMeanStd(per_update);
    row.grad_evals_per_update = evals / list.size();
    out.push_back(row);
  }
  const auto base = std::find_if(out.begin(), out.end(), [](const auto& r) {
    return r.algorithm == "shac";
  });
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (OverheadRow& r : out) {
    if (base == out.end()) {
      r.wall_ratio = r.grad_eval_ratio = nan;
    } else {
      r.wall_ratio = r.update_ms.mean / base->update_ms.mean;
      r.grad_eval_ratio = r.grad_evals_per_update / base->grad_evals_per_update;
    }
  }
  return out;
}

}  // namespace rl_lab::robust

#endif  // RL_LAB_ROBUST_STUDIES_H_
