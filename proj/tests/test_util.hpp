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

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dgsf/grid.hpp"
#include "dgsf/tensor.hpp"

namespace dgsf::testing {

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline CameraIntrinsics make_intrinsics(int h, int w) {
  CameraIntrinsics k;
  k.width = w;
  k.height = h;
  k.fx = k.fy = 0.9 * w;
  k.cx = 0.5 * (w - 1);
  k.cy = 0.5 * (h - 1);
  return k;
}

// Point grid whose valid cells hold a point on their own pixel ray at a
// random depth, so every grid invariant holds. `quantum` > 0 snaps depths
// to multiples of it, which makes equal distances common.
inline PointImage random_point_image(std::mt19937_64& rng, int h, int w, double density, double quantum = 0.0) {
  const CameraIntrinsics k = make_intrinsics(h, w);
  PointImage img(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      if (uniform(rng, 0, 1) >= density) continue;
      double z = uniform(rng, 2.0, 12.0);
      if (quantum > 0) z = std::round(z / quantum) * quantum;
      const int c = img.index(u, v);
      img.set(c, {static_cast<float>((u - k.cx) / k.fx * z), static_cast<float>((v - k.cy) / k.fy * z),
                  static_cast<float>(z)});
      img.valid[c] = 1;
    }
  return img;
}

// Cells with coordinates on a small integer lattice, for heavy distance ties.
inline PointImage lattice_point_image(std::mt19937_64& rng, int h, int w, double density) {
  PointImage img(h, w);
  for (int c = 0; c < img.cells(); ++c) {
    if (uniform(rng, 0, 1) >= density) continue;
    const Pixel p = img.pixel(c);
    img.set(c, {static_cast<float>(p.u), static_cast<float>(p.v), static_cast<float>(1 + (rng() % 3))});
    img.valid[c] = 1;
  }
  return img;
}

template <typename T>
Matrix<T> random_matrix(std::mt19937_64& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Matrix<T> m(rows, cols);
  for (auto& x : m.data) x = static_cast<T>(uniform(rng, lo, hi));
  return m;
}

}  // namespace dgsf::testing
