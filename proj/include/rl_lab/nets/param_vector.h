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

#ifndef RL_LAB_NETS_PARAM_VECTOR_H_
#define RL_LAB_NETS_PARAM_VECTOR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rl_lab::nets {

// A named block inside a flat parameter store; matrices are row-major.
struct LayerSlot {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 1;

  std::size_t size() const { return rows * cols; }
};

// Immutable once built; shared between a ParamVector and its gradients,
// optimizer moments and perturbations.
class ParamLayout {
 public:
  class Builder {
   public:
    Builder& Add(std::string name, std::size_t rows, std::size_t cols = 1) {
      slots_.push_back({std::move(name), total_, rows, cols});
      total_ += rows * cols;
      return *this;
    }
    std::shared_ptr<const ParamLayout> Build() {
      return std::shared_ptr<const ParamLayout>(
          new ParamLayout(std::move(slots_), total_));
    }

   private:
    std::vector<LayerSlot> slots_;
    std::size_t total_ = 0;
  };

  const std::vector<LayerSlot>& slots() const { return slots_; }
  std::size_t total_size() const { return total_; }

  const LayerSlot& slot(std::string_view name) const {
    for (const LayerSlot& s : slots_) {
      if (s.name == name) return s;
    }
    throw std::out_of_range("no layer named " + std::string(name));
  }

  bool operator==(const ParamLayout& other) const {
    if (total_ != other.total_ || slots_.size() != other.slots_.size()) {
      return false;
    }
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const LayerSlot& a = slots_[i];
      const LayerSlot& b = other.slots_[i];
      if (a.name != b.name || a.offset != b.offset || a.rows != b.rows ||
          a.cols != b.cols) {
        return false;
      }
    }
    return true;
  }

 private:
  ParamLayout(std::vector<LayerSlot> slots, std::size_t total)
      : slots_(std::move(slots)), total_(total) {}

  std::vector<LayerSlot> slots_;
  std::size_t total_;
};

// Flat real-valued parameter store with named layer views.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::shared_ptr<const ParamLayout> layout)
      : layout_(std::move(layout)), values_(layout_->total_size(), 0.0) {}

  const ParamLayout& layout() const { return *layout_; }
  const std::shared_ptr<const ParamLayout>& shared_layout() const {
    return layout_;
  }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> view(std::string_view layer) {
    const LayerSlot& s = layout_->slot(layer);
    return std::span<double>(values_).subspan(s.offset, s.size());
  }
  std::span<const double> view(std::string_view layer) const {
    const LayerSlot& s = layout_->slot(layer);
    return std::span<const double>(values_).subspan(s.offset, s.size());
  }

  bool SameLayout(const ParamVector& other) const {
    return layout_ == other.layout_ ||
           (layout_ && other.layout_ && *layout_ == *other.layout_);
  }

  // zeros with the same layout
  ParamVector ZerosLike() const { return ParamVector(layout_); }

  void SetZero() { std::fill(values_.begin(), values_.end(), 0.0); }

  ParamVector Abs() const {
    ParamVector out(layout_);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      out.values_[i] = std::fabs(values_[i]);
    }
    return out;
  }

  ParamVector& operator*=(double s) {
    for (double& x : values_) x *= s;
    return *this;
  }

  ParamVector& operator+=(const ParamVector& other) {
    CheckLayout(other);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      values_[i] += other.values_[i];
    }
    return *this;
  }

  ParamVector& operator-=(const ParamVector& other) {
    CheckLayout(other);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      values_[i] -= other.values_[i];
    }
    return *this;
  }

  // this += s * other
  ParamVector& AddScaled(double s, const ParamVector& other) {
    CheckLayout(other);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      values_[i] += s * other.values_[i];
    }
    return *this;
  }

  double Norm2() const {
    double sum = 0.0;
    for (double x : values_) sum += x * x;
    return std::sqrt(sum);
  }

  bool AllFinite() const {
    for (double x : values_) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  friend ParamVector operator+(ParamVector a, const ParamVector& b) {
    a += b;
    return a;
  }
  friend ParamVector operator-(ParamVector a, const ParamVector& b) {
    a -= b;
    return a;
  }
  friend ParamVector operator*(double s, ParamVector a) {
    a *= s;
    return a;
  }

  bool operator==(const ParamVector& other) const {
    return SameLayout(other) && values_ == other.values_;
  }

 private:
  void CheckLayout(const ParamVector& other) const {
    if (!SameLayout(other)) {
      throw std::invalid_argument("ParamVector layout mismatch");
    }
  }

  std::shared_ptr<const ParamLayout> layout_;
  std::vector<double> values_;
};

}  // namespace rl_lab::nets

#endif  // RL_LAB_NETS_PARAM_VECTOR_H_
