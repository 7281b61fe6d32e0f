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

#ifndef RL_LAB_NETS_MLP_H_
#define RL_LAB_NETS_MLP_H_

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rl_lab/common/random.h"
#include "rl_lab/nets/param_vector.h"

namespace rl_lab::nets {

// Fully connected network with tanh hidden layers and a linear output.
//
// Parameters are registered as "fc<i>.weight" (rows = fan_out), "fc<i>.bias"
// for hidden layers and "out.weight", "out.bias" for the head.  A tape holds
// [input | hidden_1 | ... | hidden_k | output] for one sample.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int in, std::vector<int> hidden, int out)
      : in_(in), hidden_(std::move(hidden)), out_(out) {
    if (in_ < 1 || out_ < 1) throw std::invalid_argument("mlp: empty io");
    for (int h : hidden_) {
      if (h < 1) throw std::invalid_argument("mlp: empty hidden layer");
    }
  }

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }
  const std::vector<int>& hidden() const { return hidden_; }
  int num_layers() const { return static_cast<int>(hidden_.size()) + 1; }

  // "2-64-64-1"
  std::string ShapeString() const {
    std::string s = std::to_string(in_);
    for (int h : hidden_) s += "-" + std::to_string(h);
    return s + "-" + std::to_string(out_);
  }

  void AddToLayout(ParamLayout::Builder& builder) const {
    int fan_in = in_;
    for (std::size_t i = 0; i < hidden_.size(); ++i) {
      builder.Add("fc" + std::to_string(i) + ".weight", hidden_[i], fan_in);
      builder.Add("fc" + std::to_string(i) + ".bias", hidden_[i]);
      fan_in = hidden_[i];
    }
    builder.Add("out.weight", out_, fan_in);
    builder.Add("out.bias", out_);
  }

  // resolve slot offsets once the layout exists
  void Bind(const ParamLayout& layout) {
    layers_.clear();
    std::size_t tape_pos = in_;
    int fan_in = in_;
    for (int i = 0; i < num_layers(); ++i) {
      const bool head = i == num_layers() - 1;
      const std::string prefix = head ? "out" : "fc" + std::to_string(i);
      Layer l;
      l.fan_in = fan_in;
      l.fan_out = head ? out_ : hidden_[i];
      l.weight = layout.slot(prefix + ".weight").offset;
      l.bias = layout.slot(prefix + ".bias").offset;
      l.in_pos = tape_pos - fan_in;
      l.out_pos = tape_pos;
      layers_.push_back(l);
      tape_pos += l.fan_out;
      fan_in = l.fan_out;
    }
    tape_size_ = tape_pos;
  }

  std::size_t tape_size() const { return tape_size_; }

  std::span<const double> Output(std::span<const double> tape) const {
    return tape.subspan(tape_size_ - out_, out_);
  }

  // Glorot-uniform weights, zero biases; the head is scaled by head_scale.
  void Initialize(std::span<double> theta, Rng& rng, double head_scale) const {
    for (int i = 0; i < num_layers(); ++i) {
      const Layer& l = layers_[i];
      const double bound = std::sqrt(6.0 / (l.fan_in + l.fan_out));
      std::uniform_real_distribution<double> dist(-bound, bound);
      const double scale = i == num_layers() - 1 ? head_scale : 1.0;
      for (int k = 0; k < l.fan_in * l.fan_out; ++k) {
        theta[l.weight + k] = scale * dist(rng);
      }
      for (int k = 0; k < l.fan_out; ++k) theta[l.bias + k] = 0.0;
    }
  }

  void Forward(std::span<const double> theta, std::span<const double> x,
               std::span<double> tape) const {
    for (int i = 0; i < in_; ++i) tape[i] = x[i];
    for (int li = 0; li < num_layers(); ++li) {
      const Layer& l = layers_[li];
      const bool head = li == num_layers() - 1;
      const double* w = theta.data() + l.weight;
      const double* b = theta.data() + l.bias;
      const double* in = tape.data() + l.in_pos;
      double* out = tape.data() + l.out_pos;
      for (int o = 0; o < l.fan_out; ++o) {
        double z = b[o];
        const double* row = w + static_cast<std::size_t>(o) * l.fan_in;
        for (int k = 0; k < l.fan_in; ++k) z += row[k] * in[k];
        out[o] = head ? z : std::tanh(z);
      }
    }
  }

  // Reverse pass for one sample.  d_out is the cotangent on the linear
  // output; parameter gradients are accumulated into grad (layer-major),
  // and the input cotangent is written to d_x when it is non-empty.  An empty
  // grad skips the parameter gradients.
  void Backward(std::span<const double> theta, std::span<const double> tape,
                std::span<const double> d_out, std::span<double> grad,
                std::span<double> d_x) const {
    std::vector<double> delta(d_out.begin(), d_out.end());
    std::vector<double> d_in;
    for (int li = num_layers() - 1; li >= 0; --li) {
      const Layer& l = layers_[li];
      const double* w = theta.data() + l.weight;
      const double* in = tape.data() + l.in_pos;
      const bool want_params = !grad.empty();
      double* gw = want_params ? grad.data() + l.weight : nullptr;
      double* gb = want_params ? grad.data() + l.bias : nullptr;
      const bool need_input = li > 0 || !d_x.empty();
      d_in.assign(need_input ? l.fan_in : 0, 0.0);
      for (int o = 0; o < l.fan_out; ++o) {
        const double d = delta[o];
        const std::size_t row = static_cast<std::size_t>(o) * l.fan_in;
        if (want_params) {
          gb[o] += d;
          for (int k = 0; k < l.fan_in; ++k) gw[row + k] += d * in[k];
        }
        if (need_input) {
          for (int k = 0; k < l.fan_in; ++k) d_in[k] += w[row + k] * d;
        }
      }
      if (li > 0) {
        // through the tanh that produced this layer's input
        for (int k = 0; k < l.fan_in; ++k) d_in[k] *= 1.0 - in[k] * in[k];
        delta.swap(d_in);
      } else if (!d_x.empty()) {
        for (int k = 0; k < l.fan_in; ++k) d_x[k] = d_in[k];
      }
    }
  }

 private:
  struct Layer {
    int fan_in = 0;
    int fan_out = 0;
    std::size_t weight = 0;
    std::size_t bias = 0;
    std::size_t in_pos = 0;
    std::size_t out_pos = 0;
  };

  int in_ = 0;
  std::vector<int> hidden_;
  int out_ = 0;
  std::vector<Layer> layers_;
  std::size_t tape_size_ = 0;
};

}  // namespace rl_lab::nets

#endif  // RL_LAB_NETS_MLP_H_
