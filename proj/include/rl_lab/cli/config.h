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

// Declarative run configuration: a JSON document parsed strictly (unknown
// keys are errors) into the module configs, plus its canonical text and
// SHA-256 digest.
//
// {
//   "environment": "bouncer1d" | "slider1d",
//   "algorithm": "shac" | "shac-asam" | "ppo",
//   "seeds": [0, 1, 2],
//   "output_dir": "runs",
//   "env_params": {"k_e", "k_d", "mu", "dt", "horizon"},
//   "shac": {...}, "asam": {...}, "ppo": {...},
//   "sweep": {"lambdas", "rollouts", "noise_seed", "eval_seed",
//             "policies_per_algorithm", "grid": [{"axis", "values"}],
//             "rhos"}
// }
//
// The asam block must be present exactly when algorithm is shac-asam.

#ifndef RL_LAB_CLI_CONFIG_H_
#define RL_LAB_CLI_CONFIG_H_

#include <openssl/evp.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rl_lab/diffsim/bouncer1d.h"
#include "rl_lab/diffsim/slider1d.h"
#include "rl_lab/optim/asam.h"
#include "rl_lab/ppo/ppo.h"
#include "rl_lab/robust/sweep.h"
#include "rl_lab/shac/trainer.h"

namespace rl_lab::cli {

using Json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config error: " + field + ": " + what),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Algorithm { kShac, kShacAsam, kPpo };

inline std::string_view AlgorithmName(Algorithm a) {
  switch (a) {
    case Algorithm::kShac: return "shac";
    case Algorithm::kShacAsam: return "shac-asam";
    case Algorithm::kPpo: return "ppo";
  }
  return "";
}

struct SweepSettings {
  std::vector<double> lambdas = robust::DefaultLambdaGrid();
  int rollouts = robust::kDefaultRollouts;
  std::uint64_t noise_seed = 0;
  std::uint64_t eval_seed = 0;
  int policies_per_algorithm = robust::kDefaultPoliciesPerAlgorithm;
  std::optional<std::vector<robust::SweepAxis>> grid;  // default per env
  std::vector<double> rhos = {0.05, 0.25, 0.75};
};

struct RunConfig {
  std::string environment;
  Algorithm algorithm = Algorithm::kShac;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  diffsim::EnvParams env_params;
  shac::ShacConfig shac;
  bool has_asam = false;
  optim::AsamConfig asam;
  ppo::PpoConfig ppo;
  SweepSettings sweep;
  std::string canonical_text;
  std::string digest;  // hex SHA-256 of canonical_text

  robust::SweepGrid Grid() const {
    robust::SweepGrid g = robust::DefaultGrid(environment);
    if (sweep.grid) g.axes = *sweep.grid;
    g.rollouts_per_cell = sweep.rollouts;
    g.policies_per_algorithm = sweep.policies_per_algorithm;
    return g;
  }
  // hidden layer widths of the networks trained by one algorithm
  const std::vector<int>& Hidden(std::string_view algo) const {
    return algo == "ppo" ? ppo.hidden : shac.hidden;
  }
};

// Sorted keys (nlohmann objects are ordered maps) and every number as a
// double, so 1, 1.0 and 1e0 hash alike.
inline Json Canonicalize(const Json& j) {
  if (j.is_object()) {
    Json out = Json::object();
    for (const auto& [k, v] : j.items()) out[k] = Canonicalize(v);
    return out;
  }
  if (j.is_array()) {
    Json out = Json::array();
    for (const Json& v : j) out.push_back(Canonicalize(v));
    return out;
  }
  if (j.is_number()) return Json(j.get<double>());
  return j;
}

inline std::string CanonicalText(const Json& j) {
  return Canonicalize(j).dump() + "\n";
}

inline std::string Sha256Hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) !=
      1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

namespace internal {

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(Name(), "expected an object");
  }

  bool Has(const char* key) const { return j_.contains(key); }

  const Json* Find(const char* key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  template <class T>
  void Get(const char* key, T& out) {
    if (const Json* v = Find(key)) out = Convert<T>(*v, Field(key));
  }

  template <class T>
  void Require(const char* key, T& out) {
    if (!Has(key)) throw ConfigError(Field(key), "required field missing");
    Get(key, out);
  }

  ObjectReader Child(const char* key) {
    seen_.insert(key);
    return ObjectReader(j_.at(key), Field(key));
  }

  void Finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(Field(k), "unknown field");
    }
  }

  std::string Field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  template <class T>
  static T Convert(const Json& v, const std::string& field) {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(field, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(field, "expected a number");
      return v.get<double>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number()) throw ConfigError(field, "expected an integer");
      const double d = v.get<double>();
      if (v.is_number_float() && d != std::floor(d)) {
        throw ConfigError(field, "expected an integer");
      }
      if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
      if (v.is_number_integer()) {
        const std::int64_t i = v.get<std::int64_t>();
        if (std::is_unsigned_v<T> && i < 0) {
          throw ConfigError(field, "expected a non-negative integer");
        }
        if (i < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
            (i > 0 && static_cast<std::uint64_t>(i) >
                          static_cast<std::uint64_t>(
                              std::numeric_limits<T>::max()))) {
          throw ConfigError(field, "integer out of range");
        }
        return static_cast<T>(i);
      }
      if (std::is_unsigned_v<T> && d < 0) {
        throw ConfigError(field, "expected a non-negative integer");
      }
      return static_cast<T>(d);
    } else {
      // std::vector<E>
      using E = typename T::value_type;
      if (!v.is_array()) throw ConfigError(field, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(
            Convert<E>(v[i], field + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
  }

 private:
  std::string Name() const { return path_.empty() ? "<root>" : path_; }

  const Json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

// Runs a module validator, reporting failures under the block's name.
template <class Fn>
void ValidateBlock(const std::string& block, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(block, e.what());
  }
}

inline void ReadEnvParams(ObjectReader r, diffsim::EnvParams& p) {
  r.Get("k_e", p.k_e);
  r.Get("k_d", p.k_d);
  r.Get("mu", p.mu);
  r.Get("dt", p.dt);
  r.Get("horizon", p.horizon);
  r.Finish();
}

inline void ReadShac(ObjectReader r, shac::ShacConfig& c) {
  r.Get("num_envs", c.num_envs);
  r.Get("horizon", c.horizon);
  r.Get("gamma", c.gamma);
  r.Get("td_lambda", c.td_lambda);
  r.Get("target_alpha", c.target_alpha);
  r.Get("actor_lr", c.actor_lr);
  r.Get("actor_lr_final", c.actor_lr_final);
  r.Get("critic_lr", c.critic_lr);
  r.Get("critic_epochs", c.critic_epochs);
  r.Get("episodes", c.episodes);
  r.Get("max_grad_norm", c.max_grad_norm);
  r.Get("eval_interval", c.eval_interval);
  r.Get("eval_rollouts", c.eval_rollouts);
  r.Get("hidden", c.hidden);
  r.Finish();
}

inline void ReadAsam(ObjectReader r, optim::AsamConfig& c) {
  r.Get("rho", c.rho);
  r.Get("weight_decay", c.weight_decay);
  r.Finish();
}

inline void ReadPpo(ObjectReader r, ppo::PpoConfig& c) {
  r.Get("num_envs", c.num_envs);
  r.Get("rollout_steps", c.rollout_steps);
  r.Get("gamma", c.gamma);
  r.Get("gae_lambda", c.gae_lambda);
  r.Get("clip_ratio", c.clip_ratio);
  r.Get("epochs", c.epochs);
  r.Get("minibatch_count", c.minibatch_count);
  r.Get("actor_lr", c.actor_lr);
  r.Get("critic_lr", c.critic_lr);
  r.Get("entropy_coef", c.entropy_coef);
  r.Get("total_env_steps", c.total_env_steps);
  r.Get("max_grad_norm", c.max_grad_norm);
  r.Get("eval_interval", c.eval_interval);
  r.Get("eval_rollouts", c.eval_rollouts);
  r.Get("hidden", c.hidden);
  r.Finish();
}

inline void ReadSweep(ObjectReader r, SweepSettings& s) {
  r.Get("lambdas", s.lambdas);
  r.Get("rollouts", s.rollouts);
  r.Get("noise_seed", s.noise_seed);
  r.Get("eval_seed", s.eval_seed);
  r.Get("policies_per_algorithm", s.policies_per_algorithm);
  r.Get("rhos", s.rhos);
  if (const Json* g = r.Find("grid")) {
    const std::string field = r.Field("grid");
    if (!g->is_array()) throw ConfigError(field, "expected an array");
    std::vector<robust::SweepAxis> axes;
    for (std::size_t i = 0; i < g->size(); ++i) {
      ObjectReader ar((*g)[i], field + "[" + std::to_string(i) + "]");
      std::string name;
      robust::SweepAxis axis;
      ar.Require("axis", name);
      ar.Require("values", axis.values);
      ar.Finish();
      try {
        axis.axis = robust::ParseAxis(name);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(ar.Field("axis"), e.what());
      }
      axes.push_back(std::move(axis));
    }
    s.grid = std::move(axes);
  }
  r.Finish();
}

inline void CheckHidden(const std::string& field, const std::vector<int>& h) {
  for (int w : h) {
    if (w < 1) throw ConfigError(field, "hidden widths must be >= 1");
  }
}

}  // namespace internal

// Command-line values that replace config fields before parsing.
struct ConfigOverrides {
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::string> output_dir;
};

// The digest covers every field except output_dir, so relocating the
// artifacts does not change them.
inline RunConfig ParseRunConfig(const std::string& text,
                                const ConfigOverrides& overrides = {}) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<root>", "expected an object");
  if (overrides.seeds) j["seeds"] = *overrides.seeds;
  if (overrides.output_dir) j["output_dir"] = *overrides.output_dir;
  RunConfig c;
  internal::ObjectReader r(j, "");

  r.Require("environment", c.environment);
  if (c.environment == diffsim::Bouncer1D::kName) {
    c.env_params = diffsim::Bouncer1D::DefaultParams();
  } else if (c.environment == diffsim::Slider1D::kName) {
    c.env_params = diffsim::Slider1D::DefaultParams();
  } else {
    throw ConfigError("environment",
                      "unknown environment '" + c.environment + "'");
  }
  std::string algo;
  r.Require("algorithm", algo);
  if (algo == "shac") {
    c.algorithm = Algorithm::kShac;
  } else if (algo == "shac-asam") {
    c.algorithm = Algorithm::kShacAsam;
  } else if (algo == "ppo") {
    c.algorithm = Algorithm::kPpo;
  } else {
    throw ConfigError("algorithm", "unknown algorithm '" + algo + "'");
  }
  r.Require("seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError("seeds", "at least one seed needed");
  r.Require("output_dir", c.output_dir);

  if (r.Has("env_params")) {
    internal::ReadEnvParams(r.Child("env_params"), c.env_params);
  }
  internal::ValidateBlock("env_params",
                          [&] { diffsim::ValidateParams(c.env_params); });
  if (r.Has("shac")) internal::ReadShac(r.Child("shac"), c.shac);
  c.has_asam = r.Has("asam");
  if (c.algorithm == Algorithm::kShacAsam && !c.has_asam) {
    throw ConfigError("asam", "required when algorithm is shac-asam");
  }
  if (c.algorithm != Algorithm::kShacAsam && c.has_asam) {
    throw ConfigError("asam", "only allowed when algorithm is shac-asam");
  }
  if (c.has_asam) internal::ReadAsam(r.Child("asam"), c.asam);
  if (r.Has("ppo")) internal::ReadPpo(r.Child("ppo"), c.ppo);
  if (r.Has("sweep")) internal::ReadSweep(r.Child("sweep"), c.sweep);
  r.Finish();

  c.shac.mode = c.algorithm == Algorithm::kShacAsam ? shac::Mode::kAsam
                                                    : shac::Mode::kPlain;
  c.shac.asam = c.asam;
  internal::CheckHidden("shac.hidden", c.shac.hidden);
  internal::CheckHidden("ppo.hidden", c.ppo.hidden);
  internal::ValidateBlock("shac",
                          [&] { shac::Validate(c.shac, c.env_params); });
  if (c.has_asam) {
    internal::ValidateBlock("asam", [&] { optim::ValidateAsam(c.asam); });
  }
  internal::ValidateBlock("ppo", [&] { ppo::Validate(c.ppo); });
  for (std::size_t i = 0; i < c.sweep.lambdas.size(); ++i) {
    const double l = c.sweep.lambdas[i];
    if (!(l >= 0.0 && l <= 1.0)) {
      throw ConfigError("sweep.lambdas[" + std::to_string(i) + "]",
                        "must lie in [0, 1]");
    }
  }
  if (c.sweep.rollouts < 1) {
    throw ConfigError("sweep.rollouts", "must be >= 1");
  }
  if (c.sweep.policies_per_algorithm < 1) {
    throw ConfigError("sweep.policies_per_algorithm", "must be >= 1");
  }
  for (std::size_t i = 0; i < c.sweep.rhos.size(); ++i) {
    if (!(c.sweep.rhos[i] > 0.0)) {
      throw ConfigError("sweep.rhos[" + std::to_string(i) + "]",
                        "must be > 0");
    }
  }
  internal::ValidateBlock("sweep.grid",
                          [&] { robust::ValidateGrid(c.Grid(), c.environment); });

  Json hashed = j;
  hashed.erase("output_dir");
  c.canonical_text = CanonicalText(hashed);
  c.digest = Sha256Hex(c.canonical_text);
  return c;
}

}  // namespace rl_lab::cli

#endif  // RL_LAB_CLI_CONFIG_H_
