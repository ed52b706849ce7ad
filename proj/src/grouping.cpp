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

#include "dgsf/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dgsf/errors.hpp"
#include "dgsf/simd.hpp"

namespace dgsf {

void KernelSpec::validate() const {
  DGSF_REQUIRE(k_h >= 1 && k_h % 2 == 1, "kernel: k_h must be odd and >= 1");
  DGSF_REQUIRE(k_w >= 1 && k_w % 2 == 1, "kernel: k_w must be odd and >= 1");
  DGSF_REQUIRE(K >= 1, "kernel: K must be >= 1");
  DGSF_REQUIRE(max_dist > 0.0f, "kernel: max_dist must be positive");
}

KernelSpec KernelSpec::whole_grid(int h, int w, int K, float max_dist) {
  return KernelSpec{2 * h + 1, 2 * w + 1, K, max_dist};
}

namespace {

struct Window {
  int u0, u1, v0, v1;  // inclusive, clipped
};

Window clip_window(const PointImage& src, Pixel c, const KernelSpec& spec) {
  return {std::max(0, c.u - spec.k_w / 2), std::min(src.width - 1, c.u + spec.k_w / 2),
          std::max(0, c.v - spec.k_h / 2), std::min(src.height - 1, c.v + spec.k_h / 2)};
}

void check_inputs(const PointImage& source, std::span<const Vec3f> queries, std::span<const uint8_t> active,
                  std::span<const Pixel> centers, const KernelSpec& spec) {
  spec.validate();
  DGSF_REQUIRE(queries.size() == active.size() && queries.size() == centers.size(),
               "grouping: queries, active mask and window centers differ in length");
  DGSF_REQUIRE(source.values.size() == static_cast<size_t>(source.cells()) * 3 &&
                   source.valid.size() == static_cast<size_t>(source.cells()),
               "grouping: malformed source grid");
}

NeighborTable make_table(size_t n, int K) {
  NeighborTable t;
  t.n_centers = static_cast<int>(n);
  t.K = K;
  t.indices.assign(n * K, -1);
  t.valid.assign(n * K, 0);
  t.dists.assign(n * K, 0.0f);
  return t;
}

struct Candidate {
  float d2;
  int32_t cell;
};

inline bool before(const Candidate& a, const Candidate& b) {
  return a.d2 < b.d2 || (a.d2 == b.d2 && a.cell < b.cell);
}

// Writes `found` sorted candidates into row i, padding with the nearest one.
void emit_row(NeighborTable& t, int i, const Candidate* best, int found) {
  if (found == 0) return;
  for (int k = 0; k < t.K; ++k) {
    const Candidate& c = best[k < found ? k : 0];
    const int s = t.slot(i, k);
    t.indices[s] = c.cell;
    t.valid[s] = 1;
    t.dists[s] = std::sqrt(c.d2);
  }
}

std::vector<Pixel> grid_centers(const PointImage& centers, int stride) {
  std::vector<Pixel> out(centers.cells());
  for (int cell = 0; cell < centers.cells(); ++cell) {
    const Pixel p = centers.pixel(cell);
    out[cell] = {p.u * stride + stride / 2, p.v * stride + stride / 2};
  }
  return out;
}

std::vector<Vec3f> grid_points(const PointImage& img) {
  std::vector<Vec3f> out(img.cells());
  for (int cell = 0; cell < img.cells(); ++cell) out[cell] = img.at(cell);
  return out;
}

}  // namespace

NeighborTable group_windows(const PointImage& source, std::span<const Vec3f> queries,
                            std::span<const uint8_t> active, std::span<const Pixel> window_centers,
                            const KernelSpec& spec) {
  check_inputs(source, queries, active, window_centers, spec);
  NeighborTable t = make_table(queries.size(), spec.K);

  // Planar copies so a window row is three contiguous runs.
  const size_t cells = static_cast<size_t>(source.cells());
  std::vector<float> xs(cells), ys(cells), zs(cells);
  for (size_t c = 0; c < cells; ++c) {
    xs[c] = source.values[3 * c];
    ys[c] = source.values[3 * c + 1];
    zs[c] = source.values[3 * c + 2];
  }

  std::vector<float> d2(static_cast<size_t>(std::max(1, source.width)));
  std::vector<Candidate> best(spec.K);
  uint64_t evaluated = 0;

  for (size_t i = 0; i < queries.size(); ++i) {
    if (!active[i]) continue;
    const Window w = clip_window(source, window_centers[i], spec);
    const Vec3f& q = queries[i];
    int found = 0;
    for (int v = w.v0; v <= w.v1; ++v) {
      if (w.u0 > w.u1) break;
      const size_t row = static_cast<size_t>(v) * source.width;
      const size_t len = static_cast<size_t>(w.u1 - w.u0 + 1);
      const size_t first = row + w.u0;
      simd::squared_distances(xs.data() + first, ys.data() + first, zs.data() + first, len, q, d2.data());
      for (size_t j = 0; j < len; ++j) {
        if (!source.valid[first + j]) continue;
        ++evaluated;
        const Candidate c{d2[j], static_cast<int32_t>(first + j)};
        if (found == spec.K && !before(c, best[found - 1])) continue;
        if (!(std::sqrt(c.d2) <= spec.max_dist)) continue;
        // Insertion into the sorted top-K buffer.
        int pos = found < spec.K ? found++ : spec.K - 1;
        while (pos > 0 && before(c, best[pos - 1])) {
          best[pos] = best[pos - 1];
          --pos;
        }
        best[pos] = c;
      }
    }
    emit_row(t, static_cast<int>(i), best.data(), found);
  }
  t.candidate_count = evaluated;
  return t;
}

NeighborTable brute_force_windows(const PointImage& source, std::span<const Vec3f> queries,
                                  std::span<const uint8_t> active, std::span<const Pixel> window_centers,
                                  const KernelSpec& spec) {
  check_inputs(source, queries, active, window_centers, spec);
  NeighborTable t = make_table(queries.size(), spec.K);

  // Valid cells packed row by row, so empty cells cost nothing; every valid
  // cell of a window is still evaluated.
  std::vector<size_t> row_start(source.height + 1, 0);
  std::vector<int32_t> cols, cell_of;
  std::vector<float> xs, ys, zs;
  for (int v = 0; v < source.height; ++v) {
    row_start[v] = xs.size();
    for (int u = 0; u < source.width; ++u) {
      const int cell = source.index(u, v);
      if (!source.is_valid(cell)) continue;
      const Vec3f p = source.at(cell);
      cols.push_back(u);
      cell_of.push_back(cell);
      xs.push_back(p[0]);
      ys.push_back(p[1]);
      zs.push_back(p[2]);
    }
  }
  row_start[source.height] = xs.size();
  const bool bounded = std::isfinite(spec.max_dist);
  std::vector<float> d2(xs.size());
  std::vector<Candidate> heap;  // max-heap under `before`: worst kept candidate on top
  heap.reserve(spec.K);
  uint64_t evaluated = 0;

  for (size_t i = 0; i < queries.size(); ++i) {
    if (!active[i]) continue;
    const Window w = clip_window(source, window_centers[i], spec);
    const Vec3f& q = queries[i];
    heap.clear();
    float worst = std::numeric_limits<float>::infinity();
    // Rows outward from the window center: the result does not depend on the
    // visiting order, but near rows first keeps heap replacements rare.
    const int vc = std::clamp(window_centers[i].v, w.v0, w.v1);
    const int rows = w.u0 <= w.u1 ? w.v1 - w.v0 + 1 : 0;
    for (int r = 0, up = 0, down = 0; r < rows; ++r) {
      const bool take_up = (r % 2 == 0 && vc - up >= w.v0) || vc + down + 1 > w.v1;
      const int v = take_up ? vc - up++ : vc + ++down;
      const auto row_begin = cols.begin() + static_cast<std::ptrdiff_t>(row_start[v]);
      const auto row_end = cols.begin() + static_cast<std::ptrdiff_t>(row_start[v + 1]);
      const size_t kb = std::lower_bound(row_begin, row_end, w.u0) - cols.begin();
      const size_t ke = std::upper_bound(row_begin, row_end, w.u1) - cols.begin();
      for (size_t k = kb; k < ke; ++k) {
        const float dx = xs[k] - q[0];
        const float dy = ys[k] - q[1];
        const float dz = zs[k] - q[2];
        d2[k] = (dx * dx + dy * dy) + dz * dz;
      }
      evaluated += ke - kb;
      for (size_t k = kb; k < ke; ++k) {
        if (d2[k] > worst) continue;  // cannot enter a full heap
        if (bounded && !(std::sqrt(d2[k]) <= spec.max_dist)) continue;
        const Candidate c{d2[k], cell_of[k]};
        if (static_cast<int>(heap.size()) < spec.K) {
          heap.push_back(c);
          std::push_heap(heap.begin(), heap.end(), before);
        } else if (before(c, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), before);
          heap.back() = c;
          std::push_heap(heap.begin(), heap.end(), before);
        } else {
          continue;
        }
        if (static_cast<int>(heap.size()) == spec.K) worst = heap.front().d2;
      }
    }
    std::sort_heap(heap.begin(), heap.end(), before);
    emit_row(t, static_cast<int>(i), heap.data(), static_cast<int>(heap.size()));
  }
  t.candidate_count = evaluated;
  return t;
}

NeighborTable group_neighbors(const PointImage& centers, const PointImage& source, const KernelSpec& spec,
                              int stride) {
  DGSF_REQUIRE(stride >= 1, "group_neighbors: stride must be >= 1");
  const auto queries = grid_points(centers);
  const auto windows = grid_centers(centers, stride);
  return group_windows(source, queries, centers.valid, windows, spec);
}

NeighborTable brute_force_group(const PointImage& centers, const PointImage& source, const KernelSpec& spec,
                                int stride) {
  DGSF_REQUIRE(stride >= 1, "brute_force_group: stride must be >= 1");
  const auto queries = grid_points(centers);
  const auto windows = grid_centers(centers, stride);
  return brute_force_windows(source, queries, centers.valid, windows, spec);
}

std::vector<float> gather(std::span<const float> features, int channels, const NeighborTable& table) {
  DGSF_REQUIRE(channels >= 1 && features.size() % channels == 0, "gather: feature buffer is not a multiple of channels");
  const int n_source = static_cast<int>(features.size() / channels);
  std::vector<float> out(table.indices.size() * channels, 0.0f);
  for (size_t s = 0; s < table.indices.size(); ++s) {
    if (!table.valid[s]) continue;
    const int cell = table.indices[s];
    DGSF_REQUIRE(cell >= 0 && cell < n_source, "gather: table references a cell outside the feature grid");
    std::copy_n(features.begin() + static_cast<size_t>(cell) * channels, channels, out.begin() + s * channels);
  }
  return out;
}

std::vector<double> scatter_add(std::span<const double> grouped, int channels, const NeighborTable& table,
                                int n_source) {
  DGSF_REQUIRE(grouped.size() == table.indices.size() * static_cast<size_t>(channels),
               "scatter_add: cotangent shape does not match the table");
  std::vector<double> out(static_cast<size_t>(n_source) * channels, 0.0);
  for (size_t s = 0; s < table.indices.size(); ++s) {
    if (!table.valid[s]) continue;
    const int cell = table.indices[s];
    DGSF_REQUIRE(cell >= 0 && cell < n_source, "scatter_add: table references a cell outside the grid");
    for (int c = 0; c < channels; ++c) out[static_cast<size_t>(cell) * channels + c] += grouped[s * channels + c];
  }
  return out;
}

}  // namespace dgsf
