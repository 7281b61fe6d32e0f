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

// rl_lab: train, sweep, report and verify.
//
//   rl_lab train  --config PATH [--seeds 0,1,2] [--out DIR]
//   rl_lab sweep  --kind noise|params|rho --config PATH
//                 [--checkpoints GLOB...] [--out DIR]
//   rl_lab report RUN_DIR... [--out DIR]
//   rl_lab verify [--config PATH] PATH...
//
// Exit codes: 0 ok, 1 other failure, 2 config error, 3 training aborted,
// 4 checkpoint/environment mismatch, 5 missing instrumentation,
// 6 digest mismatch.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rl_lab/cli/commands.h"

int main(int argc, char** argv) {
  namespace cli = rl_lab::cli;
  CLI::App app{"Differentiable-simulation policy learning lab"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
  auto* train = app.add_subcommand("train", "train one run per seed");
  train->add_option("--config", config, "run config (JSON)")->required();
  train->add_option("--seeds", seeds, "seed list, e.g. 0,1,2")
      ->delimiter(',');
  train->add_option("--out", out, "output directory");

  std::string kind;
  std::vector<std::string> globs;
  auto* sweep = app.add_subcommand("sweep", "robustness sweeps");
  sweep->add_option("--kind", kind, "noise, params or rho")
      ->required()
      ->check(CLI::IsMember({"noise", "params", "rho"}));
  sweep->add_option("--config", config, "run config (JSON)")->required();
  sweep->add_option("--checkpoints", globs, "checkpoint glob(s)");
  sweep->add_option("--out", out, "output directory");

  std::vector<std::string> dirs;
  auto* report = app.add_subcommand("report", "update-cost report");
  report->add_option("run_dirs", dirs, "run directories")->required();
  report->add_option("--out", out, "output directory");

  std::string verify_config;
  std::vector<std::string> paths;
  auto* verify = app.add_subcommand("verify", "check embedded digests");
  verify->add_option("--config", verify_config, "reference config");
  verify->add_option("paths", paths, "files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitConfig;
  }

  auto opt = [](const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
  };
  if (*train) {
    cli::ConfigOverrides ov;
    if (!seeds.empty()) ov.seeds = seeds;
    ov.output_dir = opt(out);
    return cli::CmdTrain(config, ov, std::cout, std::cerr);
  }
  if (*sweep) {
    return cli::CmdSweep(kind, config, globs, opt(out), std::cout, std::cerr);
  }
  if (*report) return cli::CmdReport(dirs, opt(out), std::cout, std::cerr);
  return cli::CmdVerify(opt(verify_config), paths, std::cout, std::cerr);
}
