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

// Point-feature pyramid: strided center selection, set-conv downsampling
// (MaxPool_k MLP((x_ik - x_i) ++ f_ik)) and learned upsampling.

#include <cstdint>
#include <vector>

#include "dgsf/grid.hpp"
#include "dgsf/grouping.hpp"
#include "dgsf/nn.hpp"

namespace dgsf {

// Cell values as a (cells x C) matrix; invalid cells keep their stored zeros.
template <typename T, int C>
Matrix<T> grid_matrix(const CellGrid<C>& g) {
  Matrix<T> m(g.cells(), C);
  for (size_t i = 0; i < g.values.size(); ++i) m.data[i] = static_cast<T>(g.values[i]);
  return m;
}

// Inverse of grid_matrix; rows of invalid cells are written as zeros.
template <int C, typename T>
CellGrid<C> matrix_grid(const Matrix<T>& m, int height, int width, const std::vector<uint8_t>& valid) {
  DGSF_REQUIRE(m.rows == height * width && m.cols == C, "matrix_grid: shape mismatch");
  CellGrid<C> g(height, width);
  g.valid = valid;
  for (int r = 0; r < m.rows; ++r)
    if (valid[r])
      for (int c = 0; c < C; ++c) g.values[static_cast<size_t>(r) * C + c] = static_cast<float>(m(r, c));
  return g;
}

template <typename T>
struct PyramidLevel {
  int level = 0;
  int stride = 1;      // cumulative, relative to the input grid
  PointImage points;
  Var<T> features;     // points.cells() x C, zero rows on invalid cells
};

// Center (i, j) <- src cell (i*stride + stride/2, j*stride + stride/2).
PointImage select_centers(const PointImage& src, int stride);

// Relative coordinates source[idx] - query for every slot of a table,
// zeros on invalid slots. (n*K x 3)
template <typename T>
Matrix<T> relative_coords(const PointImage& source, const std::vector<Vec3f>& queries, const NeighborTable& table);

template <typename T>
PyramidLevel<T> setconv_down(const PointImage& src_points, Var<T> src_features, int stride, const KernelSpec& spec,
                             const MlpWeights<T>& w, int out_level = 0, int out_stride = 0);

// Window center on the coarse grid for every fine cell when the coarse
// grid keeps every `ratio`-th cell.
std::vector<Pixel> coarse_window_centers(const PointImage& fine, const PointImage& coarse, int ratio);

template <typename T>
Var<T> set_upconv(const PyramidLevel<T>& coarse, const PointImage& fine_points, Var<T> fine_skip,
                  const KernelSpec& spec, const MlpWeights<T>& w1, const MlpWeights<T>& w2, int ratio = 2);

// For every valid fine cell, the 3D-nearest valid coarse cell within a 3x3
// coarse window around its parent; -1 when none.
std::vector<int32_t> nearest_coarse_cells(const PointImage& coarse, const PointImage& fine, int ratio = 2);

// Copies coarse per-cell values to the fine grid along nearest_coarse_cells.
// Values are not rescaled.
template <typename T>
Var<T> upsample_nearest(Var<T> coarse_values, const PointImage& coarse, const PointImage& fine, int ratio = 2);

}  // namespace dgsf
