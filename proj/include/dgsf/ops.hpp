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

// Differentiable operators on the tape. Row-grouped ops treat an (n*K x C)
// matrix as n groups of K consecutive rows (one group per center, one row
// per neighbor slot).

#include <cstdint>
#include <vector>

#include "dgsf/autodiff.hpp"
#include "dgsf/grid.hpp"

namespace dgsf::ops {

// x (n x Cin) * W (Cin x Cout) + b (1 x Cout)
template <typename T>
Var<T> affine(Var<T> x, Var<T> w, Var<T> b);

template <typename T>
Var<T> leaky_relu(Var<T> x, T slope);

template <typename T>
Var<T> sigmoid(Var<T> x);

template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts);

// out.row(i) = x.row(index[i]), or zeros when index[i] < 0. Backward
// scatters additively, so repeated indices accumulate.
template <typename T>
Var<T> gather_rows(Var<T> x, std::vector<int32_t> index);

// Row-major relabel; rows*cols must equal the input size.
template <typename T>
Var<T> reshape(Var<T> x, int rows, int cols);

template <typename T>
Var<T> add(Var<T> a, Var<T> b);

template <typename T>
Var<T> sub(Var<T> a, Var<T> b);

template <typename T>
Var<T> mul(Var<T> a, Var<T> b);

// x (n x C) scaled per row by s (n x 1).
template <typename T>
Var<T> mul_rows(Var<T> x, Var<T> s);

template <typename T>
Var<T> scale(Var<T> x, T factor);

// Zeroes rows with mask[i] == 0; no gradient flows through them.
template <typename T>
Var<T> mask_rows(Var<T> x, std::vector<uint8_t> mask);

// sqrt(sum_c x[i,c]^2 + eps) per row; n x 1.
template <typename T>
Var<T> row_norm(Var<T> x, T eps);

// Per-channel max over the valid slots of each group. Gradient goes to the
// first maximizing slot. Groups without a valid slot output zeros and are
// listed in `empty`.
template <typename T>
struct GroupResult {
  Var<T> out;
  std::vector<uint8_t> empty;  // one flag per group
};

template <typename T>
GroupResult<T> group_max(Var<T> x, int K, const std::vector<uint8_t>& valid);

// Masked, max-subtracted softmax of an (n*K x 1) score column within each
// group. Invalid slots are exactly zero.
template <typename T>
GroupResult<T> group_softmax(Var<T> scores, int K, const std::vector<uint8_t>& valid);

// out[i,:] = sum_k w[i*K+k] * v[i*K+k,:]
template <typename T>
Var<T> group_weighted_sum(Var<T> weights, Var<T> values, int K);

// Scalar sum of all entries.
template <typename T>
Var<T> sum(Var<T> x);

// Scalar sum_i x[i] * r[i] against a constant.
template <typename T>
Var<T> dot_const(Var<T> x, const Matrix<T>& r);

// Mean of the (n x 1) column over rows with mask[i] != 0; 0 when none.
template <typename T>
Var<T> masked_mean(Var<T> x, const std::vector<uint8_t>& mask);

// Induced optical flow: pixel(p + f) - pixel(p), continuous pinhole map.
// Rows with mask 0 or non-positive warped depth give zeros.
template <typename T>
Var<T> project_flow(const Matrix<T>& points, Var<T> flow, const CameraIntrinsics& intr,
                    const std::vector<uint8_t>& mask);

}  // namespace dgsf::ops
