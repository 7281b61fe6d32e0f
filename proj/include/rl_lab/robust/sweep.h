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

#ifndef RL_LAB_ROBUST_SWEEP_H_
#define RL_LAB_ROBUST_SWEEP_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rl_lab/common/parallel.h"
#include "rl_lab/diffsim/env.h"
#include "rl_lab/nets/policy.h"
#include "rl_lab/robust/evaluate.h"
#include "rl_lab/robust/noise.h"

namespace rl_lab::robust {

// A trained policy under evaluation.  slot is its index within its
// algorithm and selects the paired noise stream.
struct PolicyEntry {
  std::string algorithm;
  std::uint64_t seed = 0;
  int slot = 0;
  nets::PolicyNet policy;
};

// {0, 0.05, ..., 0.5}
inline std::vector<double> DefaultLambdaGrid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 20.0);
  return grid;
}

inline constexpr int kDefaultRollouts = 100;
inline constexpr int kDefaultPoliciesPerAlgorithm = 3;

// Rows ordered by (entry, lambda index).
template <diffsim::DifferentiableEnv Env>
std::vector<EvalRecord> NoiseSweep(const Env& env,
                                   const diffsim::EnvParams& params,
                                   const std::vector<PolicyEntry>& entries,
                                   const std::vector<double>& lambdas,
                                   int rollouts, std::uint64_t noise_seed,
                                   std::uint64_t eval_seed = 0) {
  for (double l : lambdas) ValidateNoise({l, noise_seed});
  const std::size_t nl = lambdas.size();
  std::vector<EvalRecord> rows(entries.size() * nl);
  ParallelFor(rows.size(), [&](std::size_t i) {
    const PolicyEntry& e = entries[i / nl];
    EvalRecord rec = EvalPolicy(env, params, e.policy,
                                NoiseSpec{lambdas[i % nl], noise_seed},
                                rollouts, eval_seed, e.slot);
    rec.algorithm = e.algorithm;
    rec.policy_seed = e.seed;
    rows[i] = std::move(rec);
  });
  return rows;
}

enum class Axis { kKe, kKd, kMu };

inline std::string_view AxisName(Axis a) {
  switch (a) {
    case Axis::kKe: return "k_e";
    case Axis::kKd: return "k_d";
    case Axis::kMu: return "mu";
  }
  return "";
}

inline Axis ParseAxis(std::string_view name) {
  if (name == "k_e") return Axis::kKe;
  if (name == "k_d") return Axis::kKd;
  if (name == "mu") return Axis::kMu;
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) +
                              "'");
}

inline double& AxisValue(diffsim::EnvParams& p, Axis a) {
  switch (a) {
    case Axis::kKe: return p.k_e;
    case Axis::kKd: return p.k_d;
    case Axis::kMu: return p.mu;
  }
  throw std::invalid_argument("bad axis");
}

struct SweepAxis {
  Axis axis = Axis::kKe;
  std::vector<double> values;  // strictly increasing
};

struct SweepGrid {
  std::vector<SweepAxis> axes;  // first axis is the slowest-varying
  int rollouts_per_cell = kDefaultRollouts;
  int policies_per_algorithm = kDefaultPoliciesPerAlgorithm;

  std::size_t cell_count() const {
    std::size_t n = axes.empty() ? 0 : 1;
    for (const SweepAxis& a : axes) n *= a.values.size();
    return n;
  }

  diffsim::EnvParams CellParams(diffsim::EnvParams base,
                                std::size_t cell) const {
    for (std::size_t k = axes.size(); k-- > 0;) {
      const std::size_t n = axes[k].values.size();
      AxisValue(base, axes[k].axis) = axes[k].values[cell % n];
      cell /= n;
    }
    return base;
  }
};

// Axes each environment responds to.
inline bool AxisApplies(std::string_view env_name, Axis a) {
  if (env_name == "bouncer1d") return a == Axis::kKe || a == Axis::kKd;
  if (env_name == "slider1d") return a == Axis::kMu;
  return false;
}

inline void ValidateGrid(const SweepGrid& g, std::string_view env_name) {
  if (g.axes.empty()) throw std::invalid_argument("sweep grid has no axes");
  if (g.rollouts_per_cell < 1) {
    throw std::invalid_argument("rollouts_per_cell must be >= 1");
  }
  if (g.policies_per_algorithm < 1) {
    throw std::invalid_argument("policies_per_algorithm must be >= 1");
  }
  for (std::size_t k = 0; k < g.axes.size(); ++k) {
    const SweepAxis& a = g.axes[k];
    const std::string name(AxisName(a.axis));
    if (!AxisApplies(env_name, a.axis)) {
      throw std::invalid_argument("axis " + name + " does not apply to " +
                                  std::string(env_name));
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (g.axes[j].axis == a.axis) {
        throw std::invalid_argument("duplicate axis " + name);
      }
    }
    if (a.values.empty()) {
      throw std::invalid_argument("axis " + name + " has no values");
    }
    for (std::size_t i = 1; i < a.values.size(); ++i) {
      if (!(a.values[i] > a.values[i - 1])) {
        throw std::invalid_argument("axis " + name +
                                    " values must be strictly increasing");
      }
    }
  }
}

inline SweepGrid DefaultGrid(std::string_view env_name) {
  SweepGrid g;
  if (env_name == "bouncer1d") {
    g.axes = {{Axis::kKe, {100, 200, 400, 800, 1600, 3200}},
              {Axis::kKd, {1, 3, 10, 30, 100}}};
  } else if (env_name == "slider1d") {
    SweepAxis mu{Axis::kMu, {}};
    for (int i = 1; i <= 10; ++i) mu.values.push_back(i / 10.0);
    g.axes = {mu};
  } else {
    throw std::invalid_argument("no default grid for " +
                                std::string(env_name));
  }
  return g;
}

// Clean (noise-free) evaluation of every policy on every cell.  Rows are
// ordered by (entry, cell).
template <diffsim::DifferentiableEnv Env>
std::vector<EvalRecord> ParamSweep(const Env& env,
                                   const diffsim::EnvParams& base,
                                   const std::vector<PolicyEntry>& entries,
                                   const SweepGrid& grid,
                                   std::uint64_t eval_seed = 0) {
  ValidateGrid(grid, Env::kName);
  const std::size_t nc = grid.cell_count();
  std::vector<EvalRecord> rows(entries.size() * nc);
  ParallelFor(rows.size(), [&](std::size_t i) {
    const PolicyEntry& e = entries[i / nc];
    EvalRecord rec = EvalPolicy(env, grid.CellParams(base, i % nc), e.policy,
                                NoiseSpec{}, grid.rollouts_per_cell,
                                eval_seed, e.slot);
    rec.algorithm = e.algorithm;
    rec.policy_seed = e.seed;
    rows[i] = std::move(rec);
  });
  return rows;
}

// Cell means of one algorithm averaged over its policies, on a two-axis
// grid: values[r][c] with rows along axes[0] and columns along axes[1].
struct HeatmapMatrix {
  std::string algorithm;
  Axis row_axis = Axis::kKe;
  Axis col_axis = Axis::kKd;
  std::vector<double> row_values;
  std::vector<double> col_values;
  std::vector<std::vector<double>> values;
};

inline HeatmapMatrix MakeHeatmap(const std::vector<EvalRecord>& rows,
                                 const SweepGrid& grid,
                                 const std::string& algorithm) {
  if (grid.axes.size() != 2) {
    throw std::invalid_argument("heatmap needs a two-axis grid");
  }
  HeatmapMatrix m;
  m.algorithm = algorithm;
  m.row_axis = grid.axes[0].axis;
  m.col_axis = grid.axes[1].axis;
  m.row_values = grid.axes[0].values;
  m.col_values = grid.axes[1].values;
  const std::size_t nr = m.row_values.size();
  const std::size_t nc = m.col_values.size();
  m.values.assign(nr, std::vector<double>(nc, 0.0));
  std::vector<std::vector<int>> counts(nr, std::vector<int>(nc, 0));
  const std::size_t cells = grid.cell_count();
  std::size_t seen = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].algorithm != algorithm) continue;
    const std::size_t cell = i % cells;
    m.values[cell / nc][cell % nc] += rows[i].mean_reward;
    ++counts[cell / nc][cell % nc];
    ++seen;
  }
  if (seen == 0) {
    throw std::invalid_argument("no sweep rows for algorithm " + algorithm);
  }
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) m.values[r][c] /= counts[r][c];
  }
  return m;
}

}  // namespace rl_lab::robust

#endif  // RL_LAB_ROBUST_SWEEP_H_
