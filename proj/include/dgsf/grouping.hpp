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

// Kernel-based neighbor grouping on the dense grid.
//
// For every query point, only the source cells inside a k_h x k_w window
// around a chosen grid position are examined; the K valid cells with the
// smallest 3D distance (ties by smaller row-major index) are kept, cells
// farther than max_dist are dropped. This bounds the number of distance
// evaluations by n_queries * k_h * k_w instead of n_queries * n_source.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dgsf/grid.hpp"

namespace dgsf {

struct KernelSpec {
  int k_h = 7;
  int k_w = 9;
  int K = 16;
  float max_dist = std::numeric_limits<float>::infinity();

  int window_cells() const { return k_h * k_w; }
  void validate() const;

  // A window large enough to cover an h x w grid from any center.
  static KernelSpec whole_grid(int h, int w, int K, float max_dist = std::numeric_limits<float>::infinity());
};

struct NeighborTable {
  int n_centers = 0;
  int K = 0;
  std::vector<int32_t> indices;  // n_centers*K flat source cells, -1 on invalid slots
  std::vector<uint8_t> valid;    // n_centers*K
  std::vector<float> dists;      // n_centers*K meters, 0 on invalid slots
  uint64_t candidate_count = 0;  // distance evaluations performed

  int slot(int center, int k) const { return center * K + k; }
  bool row_valid(int center) const { return valid[static_cast<size_t>(center) * K] != 0; }
  friend bool operator==(const NeighborTable&, const NeighborTable&) = default;
};

// Explicit form: query i looks around window_centers[i] on `source`; inactive
// queries produce all-invalid rows.
NeighborTable group_windows(const PointImage& source, std::span<const Vec3f> queries,
                            std::span<const uint8_t> active, std::span<const Pixel> window_centers,
                            const KernelSpec& spec);

// Exhaustive reference with the same contract: every valid cell of the
// window is evaluated in plain scalar code and a bounded heap keeps the K best.
NeighborTable brute_force_windows(const PointImage& source, std::span<const Vec3f> queries,
                                  std::span<const uint8_t> active, std::span<const Pixel> window_centers,
                                  const KernelSpec& spec);

// Grid form: center (i, j) sits over source cell (i*stride + stride/2,
// j*stride + stride/2); stride 1 means centers and source share the grid.
NeighborTable group_neighbors(const PointImage& centers, const PointImage& source, const KernelSpec& spec,
                              int stride = 1);
NeighborTable brute_force_group(const PointImage& centers, const PointImage& source, const KernelSpec& spec,
                                int stride = 1);

// Plain gather: out[i, k, :] = features[indices[i, k], :] or zeros.
// `features` holds source.cells() rows of `channels` floats.
std::vector<float> gather(std::span<const float> features, int channels, const NeighborTable& table);

// Adjoint of gather: accumulates grouped cotangents onto source cells
// (duplicated indices add up). Accumulates in double.
std::vector<double> scatter_add(std::span<const double> grouped, int channels, const NeighborTable& table,
                                int n_source);

}  // namespace dgsf
