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


// Brute-force reference computations shared by the unit tests and the
// acceptance gate.  They follow the defining sums literally.

#ifndef RL_LAB_TESTS_ORACLES_H_
#define RL_LAB_TESTS_ORACLES_H_

#include <cmath>
#include <cstdint>
#include <vector>

namespace rl_lab::testing {

// Every k-step return written out, then mixed with the lambda weights:
//   V~_t = (1 - lambda) sum_{k<L-t} lambda^(k-1) G^(k)_t
//          + lambda^(L-t-1) G^(L-t)_t
inline std::vector<double> TdLambdaOracle(const std::vector<double>& r,
                                          const std::vector<double>& v_next,
                                          bool terminated, double gamma,
                                          double lambda) {
  const int n = static_cast<int>(r.size());
  auto value_after = [&](int idx) {  // V(s_(idx+1))
    return (terminated && idx == n - 1) ? 0.0 : v_next[idx];
  };
  std::vector<double> out(n);
  for (int t = 0; t < n; ++t) {
    const int len = n - t;
    std::vector<double> g(len + 1);
    for (int k = 1; k <= len; ++k) {
      double sum = 0.0;
      for (int l = 0; l < k; ++l) sum += std::pow(gamma, l) * r[t + l];
      g[k] = sum + std::pow(gamma, k) * value_after(t + k - 1);
    }
    double mix = 0.0;
    for (int k = 1; k <= len - 1; ++k) {
      mix += (1.0 - lambda) * std::pow(lambda, k - 1) * g[k];
    }
    out[t] = mix + std::pow(lambda, len - 1) * g[len];
  }
  return out;
}

// A_t = sum_l (gamma lambda)^l delta_(t+l), summed until the episode ends.
inline std::vector<double> GaeOracle(const std::vector<double>& r,
                                     const std::vector<double>& v,
                                     const std::vector<double>& v_next,
                                     const std::vector<std::uint8_t>& term,
                                     const std::vector<std::uint8_t>& end,
                                     double gamma, double lambda) {
  const std::size_t n = r.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    delta[t] = r[t] + gamma * (term[t] ? 0.0 : v_next[t]) - v[t];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t l = 0; t + l < n; ++l) {
      adv[t] += std::pow(gamma * lambda, static_cast<double>(l)) * delta[t + l];
      if (end[t + l]) break;
    }
  }
  return adv;
}

}  // namespace rl_lab::testing

#endif  // RL_LAB_TESTS_ORACLES_H_
