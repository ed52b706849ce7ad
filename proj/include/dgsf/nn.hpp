// Copyright 2026 The dgsf Authors
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

#pragma once

// Shared MLPs, neighbor pooling, the finite-difference gradient checker,
// optimizers and the weights file format.

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgsf/autodiff.hpp"
#include "dgsf/ops.hpp"

namespace dgsf {

inline constexpr double kLeakySlope = 0.1;

template <typename T>
struct DenseLayer {
  Matrix<T> weight;  // in x out
  Matrix<T> bias;    // 1 x out
};

template <typename T>
struct MlpWeights {
  std::vector<DenseLayer<T>> layers;
  bool activate_last = false;

  int in_dim() const { return layers.empty() ? 0 : layers.front().weight.rows; }
  int out_dim() const { return layers.empty() ? 0 : layers.back().weight.cols; }
  void validate() const;

  template <typename U>
  MlpWeights<U> cast() const {
    MlpWeights<U> out;
    out.activate_last = activate_last;
    for (const auto& l : layers) out.layers.push_back({l.weight.template cast<U>(), l.bias.template cast<U>()});
    return out;
  }
};

// Layer widths dims[0] -> dims[1] -> ... ; weights uniform in
// +-sqrt(6 / (in + out)), zero biases.
template <typename T>
MlpWeights<T> make_mlp(std::span<const int> dims, bool activate_last, std::mt19937_64& rng);

// Single linear layer that copies input channels [offset, offset+out) and
// ignores the rest. Used to build pass-through branches in tests and
// ablation wiring.
template <typename T>
MlpWeights<T> selector_mlp(int in, int out, int offset);

template <typename T>
Var<T> mlp_forward(const MlpWeights<T>& w, Var<T> x);

template <typename T>
Matrix<T> mlp_forward(const MlpWeights<T>& w, const Matrix<T>& x);

// Max over the valid neighbor slots of each center; x is (n*K x C).
template <typename T>
ops::GroupResult<T> maxpool_neighbors(Var<T> x, int K, const std::vector<uint8_t>& valid) {
  return ops::group_max(x, K, valid);
}

// Masked softmax over the neighbor slots of each center; scores is (n*K x 1).
template <typename T>
ops::GroupResult<T> softmax_neighbors(Var<T> scores, int K, const std::vector<uint8_t>& valid) {
  return ops::group_softmax(scores, K, valid);
}

// ---------------------------------------------------------------------------
// Gradient checking (64-bit).

struct GradCheckOptions {
  double eps = 1e-5;
  // Check at most this many coordinates per input (uniformly sampled);
  // 0 checks every coordinate.
  size_t max_coords_per_input = 0;
  uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t checked = 0;
  // Coordinates whose +-eps evaluation switched a discrete branch (rectifier
  // sign, max winner, neighbor set); finite differences are meaningless there.
  size_t skipped = 0;
  // Coordinates where both the analytic and the numeric slope lie below the
  // resolution of the difference quotient (8 ulp of f over 2 eps).
  size_t unresolved = 0;
  size_t worst_input = 0;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

using ScalarFn = std::function<Var<double>(Tape<double>&)>;

// Compares the tape gradient of f with central differences for every
// coordinate of `inputs` (which f must register through Tape::param). The
// error per coordinate is |a - n| / max(1e-8, |a| + |n|), after removing
// the rounding resolution r = 8 ulp(f) / (2 eps) from |a - n|. Throws
// InvariantError naming the coordinate if any value is non-finite.
GradCheckResult grad_check(const ScalarFn& f, const std::vector<Matrix<double>*>& inputs,
                           const GradCheckOptions& opts = {});

// ---------------------------------------------------------------------------
// Parameters and optimizers.

template <typename T>
struct ParamRef {
  std::string name;
  Matrix<T>* value = nullptr;
};

template <typename T>
void collect_params(const std::string& prefix, MlpWeights<T>& w, std::vector<ParamRef<T>>& out);

enum class OptimizerKind { kSgd, kAdam };

template <typename T>
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update from the gradients recorded on `tape`. Parameters
  // the tape never saw are left untouched.
  void step(const std::vector<ParamRef<T>>& params, const Tape<T>& tape);

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  OptimizerKind kind_;
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::map<std::string, Moments> moments_;
};

// ---------------------------------------------------------------------------
// Weights file: magic, u32 count, per tensor (u32 name length, name bytes,
// u32 rank, rank x u32 dims), then all tensor data as f32 in manifest order.

struct NamedTensor {
  std::string name;
  std::vector<uint32_t> dims;
  std::vector<float> data;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

std::string encode_weights(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_weights(std::string_view bytes);

// Biases are stored with rank 1, weight matrices with rank 2.
template <typename T>
std::vector<NamedTensor> export_params(const std::vector<ParamRef<T>>& params);

// Requires an exact name/shape match with `params`.
template <typename T>
void import_params(const std::vector<NamedTensor>& tensors, const std::vector<ParamRef<T>>& params);

}  // namespace dgsf
