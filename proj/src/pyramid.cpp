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

#include "dgsf/pyramid.hpp"

#include <algorithm>

namespace dgsf {

PointImage select_centers(const PointImage& src, int stride) {
  DGSF_REQUIRE(stride >= 1, "select_centers: stride must be >= 1");
  return select_cells(src, stride);
}

template <typename T>
Matrix<T> relative_coords(const PointImage& source, const std::vector<Vec3f>& queries, const NeighborTable& table) {
  DGSF_REQUIRE(static_cast<int>(queries.size()) == table.n_centers, "relative_coords: query count mismatch");
  Matrix<T> rel(table.n_centers * table.K, 3);
  for (int i = 0; i < table.n_centers; ++i) {
    for (int k = 0; k < table.K; ++k) {
      const int s = table.slot(i, k);
      if (!table.valid[s]) continue;
      const Vec3f p = source.at(table.indices[s]);
      for (int c = 0; c < 3; ++c) rel(s, c) = static_cast<T>(p[c]) - static_cast<T>(queries[i][c]);
    }
  }
  return rel;
}

namespace {

std::vector<Vec3f> cell_points(const PointImage& img) {
  std::vector<Vec3f> out(img.cells());
  for (int c = 0; c < img.cells(); ++c) out[c] = img.at(c);
  return out;
}

// MaxPool_k MLP(rel ++ grouped features) over a neighbor table.
template <typename T>
ops::GroupResult<T> aggregate(const PointImage& source, Var<T> source_features, const std::vector<Vec3f>& queries,
                              const NeighborTable& table, const MlpWeights<T>& w) {
  Tape<T>& tape = *source_features.tape;
  const Var<T> rel = tape.constant(relative_coords<T>(source, queries, table));
  const Var<T> grouped = ops::gather_rows(source_features, table.indices);
  const Var<T> h = mlp_forward(w, ops::concat_cols<T>({rel, grouped}));
  return ops::group_max(h, table.K, table.valid);
}

}  // namespace

template <typename T>
PyramidLevel<T> setconv_down(const PointImage& src_points, Var<T> src_features, int stride, const KernelSpec& spec,
                             const MlpWeights<T>& w, int out_level, int out_stride) {
  DGSF_REQUIRE(src_features.rows() == src_points.cells(), "setconv_down: features not aligned with points");
  PointImage centers = select_centers(src_points, stride);
  const NeighborTable table = group_neighbors(centers, src_points, spec, stride);
  const auto queries = cell_points(centers);
  auto pooled = aggregate(src_points, src_features, queries, table, w);

  std::vector<uint8_t> keep(centers.cells(), 0);
  for (int c = 0; c < centers.cells(); ++c) {
    keep[c] = centers.valid[c] && !pooled.empty[c];
    if (!keep[c] && centers.valid[c]) {
      centers.valid[c] = 0;
      centers.set(c, {0.0f, 0.0f, 0.0f});
    }
  }
  PyramidLevel<T> out;
  out.level = out_level;
  out.stride = out_stride > 0 ? out_stride : stride;
  out.features = ops::mask_rows(pooled.out, keep);
  out.points = std::move(centers);
  return out;
}

std::vector<Pixel> coarse_window_centers(const PointImage& fine, const PointImage& coarse, int ratio) {
  std::vector<Pixel> out(fine.cells());
  for (int c = 0; c < fine.cells(); ++c) {
    const Pixel p = fine.pixel(c);
    out[c] = {std::min(p.u / ratio, std::max(0, coarse.width - 1)), std::min(p.v / ratio, std::max(0, coarse.height - 1))};
  }
  return out;
}

template <typename T>
Var<T> set_upconv(const PyramidLevel<T>& coarse, const PointImage& fine_points, Var<T> fine_skip,
                  const KernelSpec& spec, const MlpWeights<T>& w1, const MlpWeights<T>& w2, int ratio) {
  DGSF_REQUIRE(fine_skip.rows() == fine_points.cells(), "set_upconv: skip features not aligned with fine points");
  DGSF_REQUIRE(coarse.features.rows() == coarse.points.cells(), "set_upconv: coarse features not aligned");
  const auto queries = cell_points(fine_points);
  const auto windows = coarse_window_centers(fine_points, coarse.points, ratio);
  const NeighborTable table = group_windows(coarse.points, queries, fine_points.valid, windows, spec);
  auto pooled = aggregate(coarse.points, coarse.features, queries, table, w1);
  const Var<T> out = mlp_forward(w2, ops::concat_cols<T>({pooled.out, fine_skip}));
  return ops::mask_rows(out, fine_points.valid);
}

std::vector<int32_t> nearest_coarse_cells(const PointImage& coarse, const PointImage& fine, int ratio) {
  const auto queries = cell_points(fine);
  const auto windows = coarse_window_centers(fine, coarse, ratio);
  const KernelSpec spec{3, 3, 1};
  const NeighborTable t = group_windows(coarse, queries, fine.valid, windows, spec);
  return t.indices;
}

template <typename T>
Var<T> upsample_nearest(Var<T> coarse_values, const PointImage& coarse, const PointImage& fine, int ratio) {
  DGSF_REQUIRE(coarse_values.rows() == coarse.cells(), "upsample_nearest: values not aligned with coarse grid");
  return ops::gather_rows(coarse_values, nearest_coarse_cells(coarse, fine, ratio));
}

#define DGSF_INSTANTIATE_PYRAMID(T)                                                                              \
  template Matrix<T> relative_coords<T>(const PointImage&, const std::vector<Vec3f>&, const NeighborTable&);     \
  template PyramidLevel<T> setconv_down(const PointImage&, Var<T>, int, const KernelSpec&, const MlpWeights<T>&, \
                                        int, int);                                                               \
  template Var<T> set_upconv(const PyramidLevel<T>&, const PointImage&, Var<T>, const KernelSpec&,              \
                             const MlpWeights<T>&, const MlpWeights<T>&, int);                                   \
  template Var<T> upsample_nearest(Var<T>, const PointImage&, const PointImage&, int);

DGSF_INSTANTIATE_PYRAMID(float)
DGSF_INSTANTIATE_PYRAMID(double)

}  // namespace dgsf
