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

// Text checkpoint format, version 1:
//
//   rl_lab_checkpoint 1
//   environment <name>
//   algorithm <tag>
//   seed <integer>
//   config_digest <hex>
//   policy_arch <obs>-<h1>-...-<act> tanh
//   critic_arch <obs>-<h1>-...-1 tanh
//   params <block> <count>
//   <one shortest round-trip decimal per line>
//   ...
//   end
//
// Blocks are "policy", "critic" and "target_critic", in that order.

#ifndef RL_LAB_NETS_CHECKPOINT_H_
#define RL_LAB_NETS_CHECKPOINT_H_

#include <charconv>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rl_lab/nets/policy.h"

namespace rl_lab::nets {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& what)
      : std::runtime_error(what) {}
};

// shortest decimal that parses back to the same double
inline std::string FormatReal(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("FormatReal failed");
  return std::string(buf, end);
}

inline double ParseReal(std::string_view s) {
  double x = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw CheckpointError("bad real '" + std::string(s) + "'");
  }
  return x;
}

struct Checkpoint {
  std::string environment;
  std::string algorithm;
  std::uint64_t seed = 0;
  std::string config_digest;
  PolicyNet policy;
  CriticNet critic;
  CriticNet target_critic;
};

namespace internal {

inline std::vector<int> ParseShape(const std::string& shape) {
  std::vector<int> dims;
  std::stringstream ss(shape);
  std::string tok;
  while (std::getline(ss, tok, '-')) {
    try {
      dims.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw CheckpointError("bad architecture '" + shape + "'");
    }
  }
  if (dims.size() < 2) throw CheckpointError("bad architecture '" + shape + "'");
  return dims;
}

inline void WriteBlock(std::ostringstream& out, const char* name,
                       const ParamVector& p) {
  out << "params " << name << ' ' << p.size() << '\n';
  for (double x : p.values()) out << FormatReal(x) << '\n';
}

inline void ReadBlock(std::istringstream& in, const char* name,
                      ParamVector& p) {
  std::string tag, block;
  std::size_t count = 0;
  if (!(in >> tag >> block >> count) || tag != "params" || block != name) {
    throw CheckpointError(std::string("expected params block '") + name + "'");
  }
  if (count != p.size()) {
    throw CheckpointError(std::string("parameter count mismatch in '") + name +
                          "'");
  }
  std::string tok;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> tok)) throw CheckpointError("truncated params block");
    p[i] = ParseReal(tok);
  }
}

inline std::string ExpectField(std::istringstream& in, const char* key) {
  std::string line;
  if (!std::getline(in, line)) {
    throw CheckpointError(std::string("missing field '") + key + "'");
  }
  const std::string prefix = std::string(key) + ' ';
  if (line.rfind(prefix, 0) != 0) {
    throw CheckpointError(std::string("expected field '") + key + "'");
  }
  return line.substr(prefix.size());
}

}  // namespace internal

inline std::string SerializeCheckpoint(const Checkpoint& ck) {
  std::ostringstream out;
  out << "rl_lab_checkpoint " << kCheckpointVersion << '\n';
  out << "environment " << ck.environment << '\n';
  out << "algorithm " << ck.algorithm << '\n';
  out << "seed " << ck.seed << '\n';
  out << "config_digest " << ck.config_digest << '\n';
  out << "policy_arch " << ck.policy.mlp().ShapeString() << " tanh\n";
  out << "critic_arch " << ck.critic.mlp().ShapeString() << " tanh\n";
  internal::WriteBlock(out, "policy", ck.policy.params());
  internal::WriteBlock(out, "critic", ck.critic.params());
  internal::WriteBlock(out, "target_critic", ck.target_critic.params());
  out << "end\n";
  return out.str();
}

inline Checkpoint ParseCheckpoint(const std::string& text) {
  std::istringstream in(text);
  Checkpoint ck;
  const std::string version = internal::ExpectField(in, "rl_lab_checkpoint");
  if (version != std::to_string(kCheckpointVersion)) {
    throw CheckpointError("unsupported checkpoint version " + version);
  }
  ck.environment = internal::ExpectField(in, "environment");
  ck.algorithm = internal::ExpectField(in, "algorithm");
  try {
    ck.seed = std::stoull(internal::ExpectField(in, "seed"));
  } catch (const std::logic_error&) {
    throw CheckpointError("bad seed");
  }
  ck.config_digest = internal::ExpectField(in, "config_digest");

  auto arch = [&](const char* key) {
    std::string value = internal::ExpectField(in, key);
    const std::string suffix = " tanh";
    if (value.size() <= suffix.size() ||
        value.compare(value.size() - suffix.size(), suffix.size(), suffix) !=
            0) {
      throw CheckpointError(std::string("unsupported activation in ") + key);
    }
    return internal::ParseShape(value.substr(0, value.size() - suffix.size()));
  };
  const std::vector<int> pa = arch("policy_arch");
  const std::vector<int> ca = arch("critic_arch");
  if (ca.back() != 1) throw CheckpointError("critic head must be scalar");

  ck.policy = PolicyNet(pa.front(), pa.back(),
                        std::vector<int>(pa.begin() + 1, pa.end() - 1));
  const std::vector<int> critic_hidden(ca.begin() + 1, ca.end() - 1);
  ck.critic = CriticNet(ca.front(), critic_hidden);
  ck.target_critic = CriticNet(ca.front(), critic_hidden);
  internal::ReadBlock(in, "policy", ck.policy.params());
  internal::ReadBlock(in, "critic", ck.critic.params());
  internal::ReadBlock(in, "target_critic", ck.target_critic.params());
  std::string end;
  if (!(in >> end) || end != "end") throw CheckpointError("missing 'end'");
  return ck;
}

}  // namespace rl_lab::nets

#endif  // RL_LAB_NETS_CHECKPOINT_H_
