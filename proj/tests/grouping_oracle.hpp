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

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "dgsf/grouping.hpp"
#include "test_util.hpp"

namespace dgsf::testing {

// Sorts every valid window cell by (distance, cell) and keeps the first K.
inline NeighborTable grouping_oracle(const PointImage& centers, const PointImage& source, const KernelSpec& spec, int stride) {
  NeighborTable t;
  t.n_centers = centers.cells();
  t.K = spec.K;
  t.indices.assign(static_cast<size_t>(t.n_centers) * spec.K, -1);
  t.valid.assign(t.indices.size(), 0);
  t.dists.assign(t.indices.size(), 0.0f);
  for (int i = 0; i < centers.cells(); ++i) {
    if (!centers.is_valid(i)) continue;
    const Vec3f q = centers.at(i);
    const Pixel p = centers.pixel(i);
    const int cu = p.u * stride + stride / 2, cv = p.v * stride + stride / 2;
    std::vector<std::pair<float, int>> cand;
    for (int v = cv - spec.k_h / 2; v <= cv + spec.k_h / 2; ++v)
      for (int u = cu - spec.k_w / 2; u <= cu + spec.k_w / 2; ++u) {
        if (!source.in_bounds(u, v)) continue;
        const int c = source.index(u, v);
        if (!source.is_valid(c)) continue;
        ++t.candidate_count;
        const Vec3f s = source.at(c);
        const float dx = s[0] - q[0], dy = s[1] - q[1], dz = s[2] - q[2];
        const float d2 = (dx * dx + dy * dy) + dz * dz;
        if (std::sqrt(d2) <= spec.max_dist) cand.push_back({d2, c});
      }
    std::sort(cand.begin(), cand.end());
    if (cand.empty()) continue;
    for (int k = 0; k < spec.K; ++k) {
      const auto& c = cand[k < static_cast<int>(cand.size()) ? k : 0];
      t.indices[t.slot(i, k)] = c.second;
      t.valid[t.slot(i, k)] = 1;
      t.dists[t.slot(i, k)] = std::sqrt(c.first);
    }
  }
  return t;
}

struct Case {
  PointImage centers, source;
  KernelSpec spec;
  int stride;
};

inline Case random_grouping_case(std::mt19937_64& rng, int trial) {
  const int h = 8 + static_cast<int>(rng() % 57), w = 8 + static_cast<int>(rng() % 57);
  const int Ks[] = {4, 8, 16};
  KernelSpec spec{1 + 2 * static_cast<int>(rng() % 5), 1 + 2 * static_cast<int>(rng() % 6), Ks[rng() % 3]};
  if (trial % 2) spec.max_dist = static_cast<float>(uniform(rng, 0.2, 3.0));
  const double density = uniform(rng, 0.05, 1.0);
  PointImage source = trial % 5 == 0 ? dgsf::testing::lattice_point_image(rng, h, w, density)
                      : trial % 5 == 1 ? dgsf::testing::random_point_image(rng, h, w, density, 0.5)
                                       : dgsf::testing::random_point_image(rng, h, w, density);
  const int stride = 1 + static_cast<int>(rng() % 2);
  PointImage centers = stride == 1 ? source : select_cells(source, 2);
  return {centers, source, spec, stride};
}

}  // namespace dgsf::testing
