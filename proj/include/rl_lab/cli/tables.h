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

// Text formats of every table the command line writes or reads back.  CSV
// files start with one '#' metadata line carrying the config digest,
// followed by the header row; fields use '.' decimals and LF line endings.

#ifndef RL_LAB_CLI_TABLES_H_
#define RL_LAB_CLI_TABLES_H_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rl_lab/common/episode.h"
#include "rl_lab/common/format.h"
#include "rl_lab/robust/evaluate.h"
#include "rl_lab/robust/studies.h"

namespace rl_lab::cli {

using Meta = std::vector<std::pair<std::string, std::string>>;

inline std::string MetaLine(std::string_view kind, const Meta& meta) {
  std::string line = "# rl_lab " + std::string(kind);
  for (const auto& [k, v] : meta) line += " " + k + "=" + v;
  return line + "\n";
}

inline std::string Join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += fields[i];
  }
  return out + "\n";
}

inline constexpr std::string_view kCurveHeader =
    "episode,env_steps,eval_reward_mean,eval_reward_std,policy_loss,"
    "critic_loss,grad_evals,update_wall_ms";

inline std::string LearningCurveCsv(const std::vector<CurveRow>& rows,
                                    const Meta& meta) {
  std::string out = MetaLine("learning_curve", meta);
  out += std::string(kCurveHeader) + "\n";
  for (const CurveRow& r : rows) {
    out += Join({std::to_string(r.episode), std::to_string(r.env_steps),
                 FormatShortest(r.eval_reward_mean),
                 FormatShortest(r.eval_reward_std),
                 FormatShortest(r.policy_loss), FormatShortest(r.critic_loss),
                 std::to_string(r.grad_evals),
                 FormatShortest(r.update_wall_ms)});
  }
  return out;
}

inline std::string NoiseSweepCsv(const std::vector<robust::EvalRecord>& rows,
                                 const Meta& meta) {
  std::string out = MetaLine("noise_sweep", meta);
  out += "algo,policy_seed,lambda_mix,mean_reward,std_reward,rollouts,"
         "failures\n";
  for (const robust::EvalRecord& r : rows) {
    out += Join({r.algorithm, std::to_string(r.policy_seed),
                 FormatShortest(r.noise.lambda_mix),
                 FormatShortest(r.mean_reward), FormatShortest(r.std_reward),
                 std::to_string(r.rollouts), std::to_string(r.failures)});
  }
  return out;
}

inline std::string ParamSweepCsv(const std::vector<robust::EvalRecord>& rows,
                                 const Meta& meta) {
  std::string out = MetaLine("param_sweep", meta);
  out += "algo,policy_seed,k_e,k_d,mu,mean_reward,std_reward,rollouts,"
         "failures\n";
  for (const robust::EvalRecord& r : rows) {
    out += Join({r.algorithm, std::to_string(r.policy_seed),
                 FormatShortest(r.params.k_e), FormatShortest(r.params.k_d),
                 FormatShortest(r.params.mu), FormatShortest(r.mean_reward),
                 FormatShortest(r.std_reward), std::to_string(r.rollouts),
                 std::to_string(r.failures)});
  }
  return out;
}

inline std::string RhoStudyCsv(const std::vector<robust::RhoGroup>& groups,
                               const Meta& meta) {
  std::string out = MetaLine("rho_study", meta);
  out += "rho,seed,env_steps,grad_evals,eval_reward_mean,eval_reward_std\n";
  for (const robust::RhoGroup& g : groups) {
    for (const robust::RhoRun& r : g.runs) {
      const CurveRow& last = r.curve.back();
      out += Join({FormatShortest(g.rho), std::to_string(r.seed),
                   std::to_string(last.env_steps),
                   std::to_string(last.grad_evals),
                   FormatShortest(last.eval_reward_mean),
                   FormatShortest(last.eval_reward_std)});
    }
  }
  return out;
}

// A learning curve read back from disk lacks a column the overhead report
// needs, or is otherwise unusable for it.
class MissingInstrumentation : public std::runtime_error {
 public:
  explicit MissingInstrumentation(const std::string& what)
      : std::runtime_error(what) {}
};

inline Meta ParseMetaLine(const std::string& line) {
  Meta meta;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    const std::size_t eq = tok.find('=');
    if (eq != std::string::npos) {
      meta.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    }
  }
  return meta;
}

inline std::string MetaValue(const Meta& meta, std::string_view key) {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return "";
}

struct ParsedCurve {
  Meta meta;
  robust::RunCurve curve;
};

inline ParsedCurve ParseLearningCurve(const std::string& text,
                                      const std::string& source) {
  std::istringstream in(text);
  std::string line;
  ParsedCurve out;
  if (!std::getline(in, line) || line.rfind("# rl_lab learning_curve", 0)) {
    throw MissingInstrumentation(source + ": missing metadata line");
  }
  out.meta = ParseMetaLine(line);
  out.curve.algorithm = MetaValue(out.meta, "algorithm");
  if (out.curve.algorithm.empty()) {
    throw MissingInstrumentation(source + ": no algorithm in metadata");
  }
  try {
    out.curve.seed = std::stoull(MetaValue(out.meta, "seed"));
  } catch (const std::logic_error&) {
    throw MissingInstrumentation(source + ": no seed in metadata");
  }
  if (!std::getline(in, line)) {
    throw MissingInstrumentation(source + ": missing header row");
  }
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) header.push_back(col);
  }
  auto column = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw MissingInstrumentation(source + ": missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_ep = column("episode");
  const std::size_t c_steps = column("env_steps");
  const std::size_t c_evals = column("grad_evals");
  const std::size_t c_ms = column("update_wall_ms");
  auto number = [&](const std::string& s) {
    double x = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || end != s.data() + s.size()) {
      throw MissingInstrumentation(source + ": bad value '" + s + "'");
    }
    return x;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != header.size()) {
      throw MissingInstrumentation(source + ": ragged row");
    }
    CurveRow r;
    r.episode = static_cast<int>(number(f[c_ep]));
    r.env_steps = static_cast<std::int64_t>(number(f[c_steps]));
    r.grad_evals = static_cast<std::int64_t>(number(f[c_evals]));
    r.update_wall_ms = number(f[c_ms]);
    out.curve.rows.push_back(r);
  }
  if (out.curve.rows.empty()) {
    throw MissingInstrumentation(source + ": no rows");
  }
  return out;
}

namespace internal {

inline std::string Pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

inline std::string Ratio(double x) {
  return std::isnan(x) ? std::string("n/a") : FormatFixed(x, 3);
}

}  // namespace internal

inline std::string ReportCsv(const std::vector<robust::OverheadRow>& rows,
                             const Meta& meta) {
  std::string out = MetaLine("report", meta);
  out += "algorithm,runs,updates,update_ms_mean,update_ms_std,total_ms_mean,"
         "total_ms_std,grad_evals_per_update,wall_ratio_vs_shac,"
         "grad_eval_ratio_vs_shac\n";
  for (const robust::OverheadRow& r : rows) {
    out += Join({r.algorithm, std::to_string(r.runs),
                 std::to_string(r.updates), FormatShortest(r.update_ms.mean),
                 FormatShortest(r.update_ms.std),
                 FormatShortest(r.total_ms.mean),
                 FormatShortest(r.total_ms.std),
                 FormatShortest(r.grad_evals_per_update),
                 FormatShortest(r.wall_ratio),
                 FormatShortest(r.grad_eval_ratio)});
  }
  return out;
}

inline std::string ReportText(const std::vector<robust::OverheadRow>& rows,
                              const Meta& meta) {
  using internal::Pad;
  std::string out = MetaLine("report", meta);
  out += "Update cost per algorithm (mean +- std over runs)\n\n";
  const std::vector<std::size_t> w = {11, 6, 9, 22, 22, 16, 12, 12};
  const std::vector<std::string> head = {
      "algorithm", "runs", "updates", "update ms", "total s",
      "grad evals", "wall ratio", "eval ratio"};
  auto emit = [&](const std::vector<std::string>& f) {
    std::string line;
    for (std::size_t i = 0; i < f.size(); ++i) line += Pad(f[i], w[i]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  };
  emit(head);
  for (const robust::OverheadRow& r : rows) {
    const std::vector<std::string> f = {
        r.algorithm,
        std::to_string(r.runs),
        std::to_string(r.updates),
        FormatFixed(r.update_ms.mean, 3) + " +- " +
            FormatFixed(r.update_ms.std, 3),
        FormatFixed(r.total_ms.mean / 1000.0, 3) + " +- " +
            FormatFixed(r.total_ms.std / 1000.0, 3),
        FormatFixed(r.grad_evals_per_update, 3),
        internal::Ratio(r.wall_ratio),
        internal::Ratio(r.grad_eval_ratio)};
    emit(f);
  }
  out += "\nRatios are relative to plain shac.\n";
  return out;
}

// Every config digest embedded in a file, in order of appearance: values of
// "config_digest=", "config_digest " and comma-separated "config_digests=".
inline std::vector<std::string> EmbeddedDigests(const std::string& text) {
  std::vector<std::string> out;
  const std::string key = "config_digest";
  auto is_hex = [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  };
  for (std::size_t pos = text.find(key); pos != std::string::npos;
       pos = text.find(key, pos + 1)) {
    std::size_t i = pos + key.size();
    if (i < text.size() && text[i] == 's') ++i;
    if (i >= text.size() || (text[i] != '=' && text[i] != ' ')) continue;
    ++i;
    while (true) {
      std::size_t j = i;
      while (j < text.size() && is_hex(text[j])) ++j;
      if (j == i) break;
      out.push_back(text.substr(i, j - i));
      if (j < text.size() && text[j] == ',') {
        i = j + 1;
      } else {
        break;
      }
    }
  }
  return out;
}

}  // namespace rl_lab::cli

#endif  // RL_LAB_CLI_TABLES_H_
