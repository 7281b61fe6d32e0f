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


#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rl_lab/cli/commands.h"
#include "rl_lab/cli/config.h"
#include "rl_lab/cli/tables.h"

namespace rl_lab::cli {
namespace {

// Fresh scratch directory per test.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("rl_lab_cli_" + std::string(info->name()) + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& rel) const { return (dir_ / rel).string(); }

  std::string Config(const std::string& name, const std::string& json) {
    WriteFile(dir_ / name, json);
    return Path(name);
  }

  int Train(const std::string& config, const std::string& out = "") {
    ConfigOverrides ov;
    if (!out.empty()) ov.output_dir = out;
    return CmdTrain(config, ov, log_, err_);
  }

  fs::path dir_;
  std::ostringstream log_;
  std::ostringstream err_;
};

constexpr const char* kTinyShac = R"({
  "environment": "bouncer1d", "algorithm": "shac", "seeds": [0, 1, 2],
  "output_dir": "OUT",
  "shac": {"episodes": 3, "num_envs": 2, "horizon": 4, "critic_epochs": 2,
           "eval_rollouts": 2, "hidden": [8]},
  "ppo": {"num_envs": 2, "rollout_steps": 8, "total_env_steps": 32,
          "eval_rollouts": 2, "hidden": [8]},
  "sweep": {"rollouts": 2}
})";

std::string WithAlgo(std::string json, const std::string& algo,
                     const std::string& out) {
  json.replace(json.find("\"shac\", \"seeds\""), 6, "\"" + algo + "\"");
  json.replace(json.find("OUT"), 3, out);
  if (algo == "shac-asam") {
    json.replace(json.find("\"sweep\""), 0, "\"asam\": {\"rho\": 0.75}, ");
  }
  return json;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST_F(CliTest, MissingAsamBlockIsConfigError) {
  const std::string cfg = Config(
      "c.json", R"({"environment": "bouncer1d", "algorithm": "shac-asam",
                    "seeds": [0], "output_dir": "x"})");
  EXPECT_EQ(Train(cfg), kExitConfig);
  EXPECT_NE(err_.str().find("asam"), std::string::npos) << err_.str();
}

TEST_F(CliTest, UnknownAndInvalidFieldsAreNamed) {
  const std::string a = Config(
      "a.json", R"({"environment": "bouncer1d", "algorithm": "shac",
                    "seeds": [0], "output_dir": "x", "shac": {"horizn": 4}})");
  EXPECT_EQ(Train(a), kExitConfig);
  EXPECT_NE(err_.str().find("shac.horizn"), std::string::npos) << err_.str();

  const std::string b = Config(
      "b.json", R"({"environment": "bouncer1d", "algorithm": "shac",
                    "seeds": [0], "output_dir": "x", "shac": {"gamma": 1.5}})");
  EXPECT_EQ(Train(b), kExitConfig);
  EXPECT_NE(err_.str().find("gamma"), std::string::npos) << err_.str();

  EXPECT_EQ(Train(Path("missing.json")), kExitConfig);
}

TEST_F(CliTest, DigestIgnoresFormattingKeyOrderAndOutputDir) {
  const RunConfig a = ParseRunConfig(
      R"({"environment": "slider1d", "algorithm": "shac", "seeds": [1],
          "output_dir": "a", "shac": {"gamma": 1, "horizon": 8}})");
  const RunConfig b = ParseRunConfig(
      R"({"shac": {"horizon": 8.0, "gamma": 1.0}, "seeds": [1],
          "output_dir": "elsewhere", "algorithm": "shac",
          "environment": "slider1d"})");
  const RunConfig c = ParseRunConfig(
      R"({"environment": "slider1d", "algorithm": "shac", "seeds": [1],
          "output_dir": "a", "shac": {"gamma": 0.99, "horizon": 8}})");
  EXPECT_EQ(a.digest, b.digest);
  EXPECT_EQ(a.canonical_text, b.canonical_text);
  EXPECT_NE(a.digest, c.digest);
  EXPECT_EQ(a.digest.size(), 64u);
  EXPECT_EQ(Sha256Hex(a.canonical_text), a.digest);
}

TEST_F(CliTest, TrainingIsByteReproducible) {
  const std::string cfg =
      Config("c.json", WithAlgo(kTinyShac, "shac-asam", Path("runs")));
  ASSERT_EQ(Train(cfg, Path("a")), kExitOk) << err_.str();
  ASSERT_EQ(Train(cfg, Path("b")), kExitOk) << err_.str();
  for (const char* seed : {"0", "1", "2"}) {
    const fs::path ra = dir_ / "a" / "shac-asam" / seed;
    const fs::path rb = dir_ / "b" / "shac-asam" / seed;
    EXPECT_EQ(ReadFile(ra / kCheckpointFile), ReadFile(rb / kCheckpointFile));
    EXPECT_EQ(ReadFile(ra / kConfigFile), ReadFile(rb / kConfigFile));

    // every column but the wall-clock one
    const ParsedCurve ca =
        ParseLearningCurve(ReadFile(ra / kCurveFile), ra.string());
    const ParsedCurve cb =
        ParseLearningCurve(ReadFile(rb / kCurveFile), rb.string());
    ASSERT_EQ(ca.curve.rows.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
      const CurveRow& x = ca.curve.rows[k];
      const CurveRow& y = cb.curve.rows[k];
      EXPECT_EQ(x.env_steps, y.env_steps);
      EXPECT_EQ(x.eval_reward_mean, y.eval_reward_mean);
      EXPECT_EQ(x.policy_loss, y.policy_loss);
      EXPECT_EQ(x.critic_loss, y.critic_loss);
      EXPECT_EQ(x.grad_evals, y.grad_evals);
    }
    // M * N * h
    EXPECT_EQ(ca.curve.rows.back().env_steps, 3 * 2 * 4);
    EXPECT_EQ(ca.curve.rows.back().grad_evals, 6);
  }
}

TEST_F(CliTest, SeedOverrideSelectsRuns) {
  const std::string cfg =
      Config("c.json", WithAlgo(kTinyShac, "shac", Path("runs")));
  ConfigOverrides ov;
  ov.seeds = std::vector<std::uint64_t>{7};
  ASSERT_EQ(CmdTrain(cfg, ov, log_, err_), kExitOk) << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "runs" / "shac" / "7" / kCheckpointFile));
  EXPECT_FALSE(fs::exists(dir_ / "runs" / "shac" / "0"));
}

class CliPipeline : public CliTest {
 protected:
  void TrainAll() {
    for (const char* algo : {"shac", "shac-asam", "ppo"}) {
      const std::string cfg = Config(std::string(algo) + ".json",
                                     WithAlgo(kTinyShac, algo, Path("runs")));
      ASSERT_EQ(Train(cfg), kExitOk) << err_.str();
    }
  }
  std::string Checkpoints() const { return Path("runs/*/*/checkpoint.txt"); }
};

TEST_F(CliPipeline, NoiseSweepCoversEveryPolicyAndLambda) {
  TrainAll();
  const std::string cfg = Path("shac.json");
  ASSERT_EQ(CmdSweep("noise", cfg, {Checkpoints()}, Path("sw"), log_, err_),
            kExitOk)
      << err_.str();
  const std::vector<std::string> lines =
      Lines(ReadFile(dir_ / "sw" / "noise_sweep.csv"));
  ASSERT_EQ(lines.size(), 2u + 99u);  // meta line, header, 9 x 11 rows
  EXPECT_EQ(lines[0].rfind("# rl_lab", 0), 0u);
  EXPECT_EQ(lines[1],
            "algo,policy_seed,lambda_mix,mean_reward,std_reward,rollouts,"
            "failures");
  EXPECT_EQ(lines[2].rfind("ppo,0,0,", 0), 0u);

  // re-running gives identical bytes
  const std::string first = ReadFile(dir_ / "sw" / "noise_sweep.csv");
  ASSERT_EQ(CmdSweep("noise", cfg, {Checkpoints()}, Path("sw2"), log_, err_),
            kExitOk);
  EXPECT_EQ(ReadFile(dir_ / "sw2" / "noise_sweep.csv"), first);
}

TEST_F(CliPipeline, ParamSweepWritesTableAndHeatmaps) {
  TrainAll();
  ASSERT_EQ(CmdSweep("params", Path("shac.json"), {Checkpoints()}, Path("ps"),
                     log_, err_),
            kExitOk)
      << err_.str();
  const std::vector<std::string> lines =
      Lines(ReadFile(dir_ / "ps" / "param_sweep.csv"));
  EXPECT_EQ(lines.size(), 2u + 9u * 30u);
  for (const char* algo : {"ppo", "shac", "shac-asam"}) {
    const fs::path svg = dir_ / "ps" / ("heatmap_" + std::string(algo) + ".svg");
    ASSERT_TRUE(fs::exists(svg));
    const std::string a = ReadFile(svg);
    ASSERT_EQ(CmdSweep("params", Path("shac.json"), {Checkpoints()},
                       Path("ps2"), log_, err_),
              kExitOk);
    EXPECT_EQ(ReadFile(dir_ / "ps2" / svg.filename()), a);
  }
}

TEST_F(CliPipeline, MismatchedCheckpointsExitFour) {
  TrainAll();
  const std::string slider = Config(
      "slider.json", R"({"environment": "slider1d", "algorithm": "shac",
                         "seeds": [0], "output_dir": "x",
                         "shac": {"hidden": [8]}})");
  EXPECT_EQ(CmdSweep("noise", slider, {Checkpoints()}, Path("s1"), log_, err_),
            kExitCheckpointMismatch);
  const std::string wide = Config(
      "wide.json", R"({"environment": "bouncer1d", "algorithm": "shac",
                       "seeds": [0], "output_dir": "x"})");
  EXPECT_EQ(CmdSweep("noise", wide, {Checkpoints()}, Path("s2"), log_, err_),
            kExitCheckpointMismatch);
  EXPECT_EQ(CmdSweep("noise", wide, {Path("nothing/*.txt")}, Path("s3"), log_,
                     err_),
            kExitCheckpointMismatch);
}

TEST_F(CliPipeline, ReportIsIdempotentWithExactEvalRatio) {
  TrainAll();
  ASSERT_EQ(CmdReport({Path("runs")}, std::nullopt, log_, err_), kExitOk)
      << err_.str();
  const std::string csv = ReadFile(dir_ / "runs" / "report.csv");
  const std::string txt = ReadFile(dir_ / "runs" / "report.txt");
  ASSERT_EQ(CmdReport({Path("runs")}, std::nullopt, log_, err_), kExitOk);
  EXPECT_EQ(ReadFile(dir_ / "runs" / "report.csv"), csv);
  EXPECT_EQ(ReadFile(dir_ / "runs" / "report.txt"), txt);

  const std::vector<std::string> lines = Lines(csv);
  const auto asam = std::find_if(lines.begin(), lines.end(), [](auto& l) {
    return l.rfind("shac-asam,", 0) == 0;
  });
  ASSERT_NE(asam, lines.end());
  // grad_eval_ratio is the last column
  EXPECT_EQ(asam->substr(asam->rfind(',') + 1), "2");
}

TEST_F(CliTest, ReportWithoutInstrumentationExitsFive) {
  EXPECT_EQ(CmdReport({Path("empty")}, std::nullopt, log_, err_),
            kExitMissingInstrumentation);
  fs::create_directories(dir_ / "empty");
  EXPECT_EQ(CmdReport({Path("empty")}, std::nullopt, log_, err_),
            kExitMissingInstrumentation);
  WriteFile(dir_ / "bad" / "shac" / "0" / kCurveFile,
            "# rl_lab learning_curve algorithm=shac seed=0 config_digest=ab\n"
            "episode,env_steps,eval_reward_mean\n1,64,0.5\n");
  EXPECT_EQ(CmdReport({Path("bad")}, std::nullopt, log_, err_),
            kExitMissingInstrumentation);
  EXPECT_NE(err_.str().find("grad_evals"), std::string::npos) << err_.str();
}

TEST_F(CliPipeline, VerifyDetectsTampering) {
  TrainAll();
  ASSERT_EQ(CmdSweep("noise", Path("shac.json"), {Checkpoints()}, Path("sw"),
                     log_, err_),
            kExitOk);
  EXPECT_EQ(CmdVerify(std::nullopt, {Path("runs"), Path("sw")}, log_, err_),
            kExitOk)
      << err_.str();
  EXPECT_EQ(CmdVerify(Path("shac.json"), {Path("sw")}, log_, err_), kExitOk);

  // a different config does not match the sweep's digest
  EXPECT_EQ(CmdVerify(Path("ppo.json"), {Path("sw")}, log_, err_),
            kExitDigestMismatch);

  const fs::path cfg = dir_ / "runs" / "shac" / "1" / kConfigFile;
  std::string text = ReadFile(cfg);
  text.replace(text.find("\"episodes\":3"), 12, "\"episodes\":4");
  WriteFile(cfg, text);
  EXPECT_EQ(CmdVerify(std::nullopt, {Path("runs")}, log_, err_),
            kExitDigestMismatch);
}

#ifdef RL_LAB_CLI_PATH
int RunCli(const std::string& args) {
  const std::string cmd =
      std::string(RL_LAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, BinaryExitCodes) {
  EXPECT_EQ(RunCli("bogus"), kExitConfig);
  EXPECT_EQ(RunCli("sweep --kind sideways --config x.json"), kExitConfig);
  const std::string cfg = Config(
      "c.json", R"({"environment": "bouncer1d", "algorithm": "shac-asam",
                    "seeds": [0], "output_dir": "x"})");
  EXPECT_EQ(RunCli("train --config " + cfg), kExitConfig);
  const std::string ok =
      Config("ok.json", WithAlgo(kTinyShac, "shac", Path("runs")));
  EXPECT_EQ(RunCli("train --config " + ok + " --seeds 4,5"), kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "runs" / "shac" / "5" / kCurveFile));
  EXPECT_EQ(RunCli("report " + Path("runs")), kExitOk);
  EXPECT_EQ(RunCli("verify " + Path("runs")), kExitOk);
}
#endif

}  // namespace
}  // namespace rl_lab::cli
