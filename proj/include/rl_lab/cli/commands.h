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

// Subcommands of the rl_lab tool.  This is the only part of the library
// that touches the filesystem; every function returns a process exit code.

#ifndef RL_LAB_CLI_COMMANDS_H_
#define RL_LAB_CLI_COMMANDS_H_

#include <glob.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rl_lab/cli/config.h"
#include "rl_lab/cli/tables.h"
#include "rl_lab/common/parallel.h"
#include "rl_lab/diffsim/bouncer1d.h"
#include "rl_lab/diffsim/slider1d.h"
#include "rl_lab/nets/checkpoint.h"
#include "rl_lab/ppo/ppo.h"
#include "rl_lab/robust/heatmap_svg.h"
#include "rl_lab/robust/studies.h"
#include "rl_lab/robust/sweep.h"
#include "rl_lab/shac/trainer.h"

namespace rl_lab::cli {

namespace fs = std::filesystem;

enum ExitCode {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitAborted = 3,
  kExitCheckpointMismatch = 4,
  kExitMissingInstrumentation = 5,
  kExitDigestMismatch = 6,
};

inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kCheckpointFile = "checkpoint.txt";
inline constexpr const char* kCurveFile = "learning_curve.csv";

// Carries an exit code out of nested helpers.
class CommandError : public std::runtime_error {
 public:
  CommandError(int code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

inline std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CommandError(kExitFailure, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void WriteFile(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw CommandError(kExitFailure, "cannot write " + p.string());
}

inline RunConfig LoadConfig(const std::string& path,
                            const ConfigOverrides& overrides = {}) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const CommandError&) {
    throw ConfigError("<file>", "cannot read config file '" + path + "'");
  }
  return ParseRunConfig(text, overrides);
}

// Calls fn with the environment named in the config.
template <class Fn>
decltype(auto) WithEnv(const std::string& name, Fn&& fn) {
  if (name == diffsim::Bouncer1D::kName) return fn(diffsim::Bouncer1D{});
  if (name == diffsim::Slider1D::kName) return fn(diffsim::Slider1D{});
  throw ConfigError("environment", "unknown environment '" + name + "'");
}

struct TrainedRun {
  std::vector<CurveRow> curve;
  nets::PolicyNet policy;
  nets::CriticNet critic;
  nets::CriticNet target_critic;
};

template <diffsim::DifferentiableEnv Env>
TrainedRun TrainOne(const Env& env, const RunConfig& cfg, std::uint64_t seed) {
  TrainedRun out;
  if (cfg.algorithm == Algorithm::kPpo) {
    ppo::PpoTrainer<Env> trainer(env, cfg.env_params, cfg.ppo, seed);
    out.curve = trainer.Train();
    out.policy = trainer.policy();
    out.critic = trainer.critic();
    out.target_critic = trainer.critic();
  } else {
    shac::ShacTrainer<Env> trainer(env, cfg.env_params, cfg.shac, seed);
    out.curve = trainer.Train();
    out.policy = trainer.policy();
    out.critic = trainer.critic();
    out.target_critic = trainer.target_critic();
  }
  return out;
}

inline Meta RunMeta(const RunConfig& cfg, std::string_view algorithm,
                    std::uint64_t seed) {
  return {{"environment", cfg.environment},
          {"algorithm", std::string(algorithm)},
          {"seed", std::to_string(seed)},
          {"config_digest", cfg.digest}};
}

// config.json, checkpoint.txt and learning_curve.csv of one run.  The
// config file holds the canonical text whose SHA-256 is the digest.
inline void WriteRunDir(const fs::path& dir, const RunConfig& cfg,
                        std::string_view algorithm, std::uint64_t seed,
                        const std::vector<CurveRow>& curve,
                        const nets::PolicyNet& policy,
                        const nets::CriticNet& critic,
                        const nets::CriticNet& target_critic) {
  nets::Checkpoint ck;
  ck.environment = cfg.environment;
  ck.algorithm = std::string(algorithm);
  ck.seed = seed;
  ck.config_digest = cfg.digest;
  ck.policy = policy;
  ck.critic = critic;
  ck.target_critic = target_critic;
  WriteFile(dir / kConfigFile, cfg.canonical_text);
  WriteFile(dir / kCheckpointFile, nets::SerializeCheckpoint(ck));
  WriteFile(dir / kCurveFile,
            LearningCurveCsv(curve, RunMeta(cfg, algorithm, seed)));
}

template <class Body>
int Guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  } catch (const TrainingAborted& e) {
    err << "training aborted: " << e.what() << "\n";
    return kExitAborted;
  } catch (const MissingInstrumentation& e) {
    err << "missing instrumentation: " << e.what() << "\n";
    return kExitMissingInstrumentation;
  } catch (const CommandError& e) {
    err << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

// train: one run per seed under <out>/<algorithm>/<seed>/.
inline int CmdTrain(const std::string& config_path,
                    const ConfigOverrides& overrides, std::ostream& log,
                    std::ostream& err) {
  return Guarded(err, [&] {
    const RunConfig cfg = LoadConfig(config_path, overrides);
    const std::string_view algo = AlgorithmName(cfg.algorithm);
    const fs::path root = fs::path(cfg.output_dir) / std::string(algo);
    std::vector<TrainedRun> runs(cfg.seeds.size());
    WithEnv(cfg.environment, [&](const auto& env) {
      ParallelFor(cfg.seeds.size(), [&](std::size_t i) {
        runs[i] = TrainOne(env, cfg, cfg.seeds[i]);
        const TrainedRun& r = runs[i];
        WriteRunDir(root / std::to_string(cfg.seeds[i]), cfg, algo,
                    cfg.seeds[i], r.curve, r.policy, r.critic,
                    r.target_critic);
      });
    });
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const CurveRow& last = runs[i].curve.back();
      log << algo << " seed " << cfg.seeds[i] << ": eval reward "
          << FormatFixed(last.eval_reward_mean, 3) << " after "
          << last.env_steps << " env steps -> "
          << (root / std::to_string(cfg.seeds[i])).string() << "\n";
    }
    return kExitOk;
  });
}

inline std::vector<std::string> ExpandGlobs(
    const std::vector<std::string>& patterns) {
  std::set<std::string> paths;
  for (const std::string& pat : patterns) {
    glob_t g{};
    const int rc = ::glob(pat.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.insert(g.gl_pathv[i]);
    }
    globfree(&g);
  }
  return {paths.begin(), paths.end()};
}

// Loads checkpoints, checks them against the config's environment and
// network shapes, and assigns per-algorithm slots in seed order.
template <diffsim::DifferentiableEnv Env>
std::vector<robust::PolicyEntry> LoadPolicies(
    const RunConfig& cfg, const std::vector<std::string>& patterns,
    std::ostream& log) {
  const std::vector<std::string> paths = ExpandGlobs(patterns);
  if (paths.empty()) {
    throw CommandError(kExitCheckpointMismatch, "no checkpoints matched");
  }
  std::vector<robust::PolicyEntry> all;
  for (const std::string& p : paths) {
    nets::Checkpoint ck;
    try {
      ck = nets::ParseCheckpoint(ReadFile(p));
    } catch (const nets::CheckpointError& e) {
      throw CommandError(kExitCheckpointMismatch, p + ": " + e.what());
    }
    if (ck.environment != cfg.environment) {
      throw CommandError(kExitCheckpointMismatch,
                         p + ": environment '" + ck.environment +
                             "' differs from config '" + cfg.environment +
                             "'");
    }
    if (ck.algorithm != "shac" && ck.algorithm != "shac-asam" &&
        ck.algorithm != "ppo") {
      throw CommandError(kExitCheckpointMismatch,
                         p + ": unknown algorithm '" + ck.algorithm + "'");
    }
    const nets::PolicyNet expected(Env::kObsDim, Env::kActDim,
                                   cfg.Hidden(ck.algorithm));
    if (ck.policy.ArchString() != expected.ArchString()) {
      throw CommandError(kExitCheckpointMismatch,
                         p + ": architecture '" + ck.policy.ArchString() +
                             "' differs from '" + expected.ArchString() +
                             "'");
    }
    all.push_back({ck.algorithm, ck.seed, 0, std::move(ck.policy)});
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.algorithm != b.algorithm ? a.algorithm < b.algorithm
                                      : a.seed < b.seed;
  });
  std::vector<robust::PolicyEntry> out;
  std::map<std::string, int> count;
  for (robust::PolicyEntry& e : all) {
    int& n = count[e.algorithm];
    if (n >= cfg.sweep.policies_per_algorithm) continue;
    e.slot = n++;
    out.push_back(std::move(e));
  }
  for (const auto& [algo, n] : count) {
    if (n < cfg.sweep.policies_per_algorithm) {
      log << "note: " << algo << " has " << n << " of "
          << cfg.sweep.policies_per_algorithm << " policies\n";
    }
  }
  return out;
}

inline std::string RhoDirName(double rho) {
  return "rho_" + FormatShortest(rho);
}

// sweep: noise, params or rho study; writes into out_dir (default: the
// config's output_dir).
inline int CmdSweep(const std::string& kind, const std::string& config_path,
                    const std::vector<std::string>& checkpoint_globs,
                    const std::optional<std::string>& out_dir,
                    std::ostream& log, std::ostream& err) {
  return Guarded(err, [&] {
    if (kind != "noise" && kind != "params" && kind != "rho") {
      throw ConfigError("--kind", "expected noise, params or rho");
    }
    ConfigOverrides ov;
    ov.output_dir = out_dir;
    const RunConfig cfg = LoadConfig(config_path, ov);
    const fs::path out(cfg.output_dir);
    const Meta meta = {{"environment", cfg.environment},
                       {"config_digest", cfg.digest}};
    WriteFile(out / kConfigFile, cfg.canonical_text);
    WithEnv(cfg.environment, [&](const auto& env) {
      using Env = std::decay_t<decltype(env)>;
      if (kind == "rho") {
        shac::ShacConfig base = cfg.shac;
        base.asam.weight_decay = cfg.asam.weight_decay;
        const std::vector<robust::RhoGroup> groups = robust::RhoStudy(
            env, cfg.env_params, base, cfg.sweep.rhos, cfg.seeds,
            cfg.sweep.lambdas, cfg.sweep.rollouts, cfg.sweep.noise_seed,
            cfg.sweep.eval_seed);
        for (const robust::RhoGroup& g : groups) {
          const fs::path dir = out / RhoDirName(g.rho);
          for (const robust::RhoRun& r : g.runs) {
            WriteRunDir(dir / std::to_string(r.seed), cfg, "shac-asam",
                        r.seed, r.curve, r.policy, r.critic, r.target_critic);
          }
          Meta m = meta;
          m.emplace_back("rho", FormatShortest(g.rho));
          WriteFile(dir / "noise_sweep.csv", NoiseSweepCsv(g.noise_rows, m));
        }
        WriteFile(out / "rho_study.csv", RhoStudyCsv(groups, meta));
        log << "rho study: " << groups.size() << " rho values x "
            << cfg.seeds.size() << " seeds -> " << out.string() << "\n";
        return;
      }
      const std::vector<robust::PolicyEntry> entries =
          LoadPolicies<Env>(cfg, checkpoint_globs, log);
      if (kind == "noise") {
        const auto rows = robust::NoiseSweep(
            env, cfg.env_params, entries, cfg.sweep.lambdas,
            cfg.sweep.rollouts, cfg.sweep.noise_seed, cfg.sweep.eval_seed);
        WriteFile(out / "noise_sweep.csv", NoiseSweepCsv(rows, meta));
        log << "noise sweep: " << rows.size() << " rows -> "
            << (out / "noise_sweep.csv").string() << "\n";
        return;
      }
      const robust::SweepGrid grid = cfg.Grid();
      const auto rows = robust::ParamSweep(env, cfg.env_params, entries, grid,
                                           cfg.sweep.eval_seed);
      WriteFile(out / "param_sweep.csv", ParamSweepCsv(rows, meta));
      log << "param sweep: " << rows.size() << " rows -> "
          << (out / "param_sweep.csv").string() << "\n";
      if (grid.axes.size() != 2) return;
      double lo = rows.front().mean_reward, hi = lo;
      std::vector<std::string> algos;
      for (const robust::EvalRecord& r : rows) {
        lo = std::min(lo, r.mean_reward);
        hi = std::max(hi, r.mean_reward);
        if (std::find(algos.begin(), algos.end(), r.algorithm) ==
            algos.end()) {
          algos.push_back(r.algorithm);
        }
      }
      for (const std::string& algo : algos) {
        const robust::HeatmapMatrix m = robust::MakeHeatmap(rows, grid, algo);
        const std::string svg =
            "<!-- rl_lab heatmap environment=" + cfg.environment +
            " algorithm=" + algo + " config_digest=" + cfg.digest + " -->\n" +
            robust::HeatmapSvg(m, lo, hi,
                               cfg.environment + " " + algo +
                                   ": mean episode reward");
        WriteFile(out / ("heatmap_" + algo + ".svg"), svg);
      }
    });
    return kExitOk;
  });
}

inline std::vector<fs::path> FindCurves(const std::vector<std::string>& dirs) {
  std::set<fs::path> found;
  for (const std::string& d : dirs) {
    const fs::path p(d);
    if (fs::is_regular_file(p)) {
      found.insert(p);
      continue;
    }
    if (!fs::is_directory(p)) {
      throw CommandError(kExitMissingInstrumentation,
                         "run directory not found: " + d);
    }
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file() && e.path().filename() == kCurveFile) {
        found.insert(e.path());
      }
    }
  }
  return {found.begin(), found.end()};
}

// report: overhead table over every learning curve found below the given
// directories.  Writes report.txt and report.csv into out_dir (default: the
// first directory).
inline int CmdReport(const std::vector<std::string>& run_dirs,
                     const std::optional<std::string>& out_dir,
                     std::ostream& log, std::ostream& err) {
  return Guarded(err, [&] {
    if (run_dirs.empty()) {
      throw CommandError(kExitFailure, "no run directories given");
    }
    const std::vector<fs::path> files = FindCurves(run_dirs);
    if (files.empty()) {
      throw MissingInstrumentation("no learning curves found");
    }
    std::vector<robust::RunCurve> curves;
    std::set<std::string> digests;
    for (const fs::path& f : files) {
      ParsedCurve pc = ParseLearningCurve(ReadFile(f), f.string());
      const std::string d = MetaValue(pc.meta, "config_digest");
      if (d.empty()) throw MissingInstrumentation(f.string() + ": no digest");
      digests.insert(d);
      curves.push_back(std::move(pc.curve));
    }
    std::string joined;
    for (const std::string& d : digests) {
      joined += (joined.empty() ? "" : ",") + d;
    }
    const Meta meta = {{"runs", std::to_string(curves.size())},
                       {"config_digests", joined}};
    const auto rows = robust::OverheadReport(curves);
    const fs::path out = out_dir ? fs::path(*out_dir) : fs::path(run_dirs[0]);
    const std::string text = ReportText(rows, meta);
    WriteFile(out / "report.txt", text);
    WriteFile(out / "report.csv", ReportCsv(rows, meta));
    log << text;
    return kExitOk;
  });
}

// config.json in the file's directory or the closest ancestor up to root
inline std::optional<fs::path> NearestConfig(const fs::path& file,
                                             const fs::path& root) {
  const fs::path stop = fs::weakly_canonical(root);
  for (fs::path dir = fs::weakly_canonical(file).parent_path();;
       dir = dir.parent_path()) {
    if (fs::exists(dir / kConfigFile)) return dir / kConfigFile;
    if (dir == stop || dir == dir.parent_path()) return std::nullopt;
  }
}

// verify: recomputes the config digest and checks it against every digest
// embedded in the output files.  Without a config, each directory's own
// config.json is the reference.
inline int CmdVerify(const std::optional<std::string>& config_path,
                     const std::vector<std::string>& paths, std::ostream& log,
                     std::ostream& err) {
  return Guarded(err, [&] {
    std::optional<std::string> fixed;
    if (config_path) fixed = LoadConfig(*config_path).digest;
    int checked = 0;
    std::vector<std::string> problems;
    auto check_file = [&](const fs::path& f, const std::string& expected) {
      const std::string ext = f.extension().string();
      if (f.filename() == kConfigFile ||
          (ext != ".csv" && ext != ".txt" && ext != ".svg")) {
        return;
      }
      const std::vector<std::string> found = EmbeddedDigests(ReadFile(f));
      ++checked;
      if (found.empty()) {
        problems.push_back(f.string() + ": no embedded digest");
      }
      for (const std::string& d : found) {
        if (d != expected) {
          problems.push_back(f.string() + ": digest " + d + " != " + expected);
        }
      }
    };
    for (const std::string& p : paths) {
      const fs::path root(p);
      if (fs::is_regular_file(root)) {
        if (!fixed) {
          throw CommandError(kExitFailure,
                             "verifying a single file needs --config");
        }
        check_file(root, *fixed);
        continue;
      }
      if (!fs::is_directory(root)) {
        throw CommandError(kExitFailure, "not found: " + p);
      }
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const fs::path& f : files) {
        std::string expected;
        if (fixed) {
          expected = *fixed;
        } else {
          const std::optional<fs::path> cfg_file = NearestConfig(f, root);
          if (!cfg_file) continue;
          expected = Sha256Hex(ReadFile(*cfg_file));
        }
        check_file(f, expected);
      }
    }
    for (const std::string& m : problems) err << "mismatch: " << m << "\n";
    if (!problems.empty()) return static_cast<int>(kExitDigestMismatch);
    if (checked == 0) {
      throw CommandError(kExitDigestMismatch, "no files to verify");
    }
    log << "verified " << checked << " file(s)\n";
    return static_cast<int>(kExitOk);
  });
}

}  // namespace rl_lab::cli

#endif  // RL_LAB_CLI_COMMANDS_H_
