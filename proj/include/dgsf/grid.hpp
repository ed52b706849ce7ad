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

// Dense H x W grid representation of a 2.5D point cloud.
//
// Each cell of the grid stores the 3D point that projects into it through a
// pinhole camera, or (0,0,0) with a cleared validity bit when nothing landed
// there. The same container type is reused for per-cell 3D flow vectors.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dgsf {

using Vec3f = std::array<float, 3>;

struct Pixel {
  int u = 0;  // column
  int v = 0;  // row
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  // Throws InputError if fx/fy are not positive or the principal point lies
  // outside the grid.
  void validate() const;

  // Intrinsics of the grid obtained by keeping cell (i*s + s/2) of every
  // row/column, i.e. what select_centers produces at that stride.
  CameraIntrinsics strided(int stride) const;
};

// Continuous pinhole coordinates (u, v) of a camera-frame point.
std::array<double, 2> project_continuous(const CameraIntrinsics& intr, double x, double y, double z);

// Round-to-nearest pixel rule: floor(f*x/z + c + 0.5). Caller ensures z > 0.
Pixel pixel_of(const CameraIntrinsics& intr, double x, double y, double z);

// H x W grid with C channels per cell plus a validity mask.
template <int C>
struct CellGrid {
  static constexpr int kChannels = C;

  int height = 0;
  int width = 0;
  std::vector<float> values;    // row-major, C floats per cell
  std::vector<uint8_t> valid;   // one byte per cell, 0 or 1

  CellGrid() = default;
  CellGrid(int h, int w)
      : height(h), width(w), values(static_cast<size_t>(h) * w * C, 0.0f), valid(static_cast<size_t>(h) * w, 0) {}

  int cells() const { return height * width; }
  int index(int u, int v) const { return v * width + u; }
  Pixel pixel(int cell) const { return {cell % width, cell / width}; }
  bool in_bounds(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }
  bool is_valid(int cell) const { return valid[cell] != 0; }

  std::array<float, C> at(int cell) const {
    std::array<float, C> out;
    for (int c = 0; c < C; ++c) out[c] = values[static_cast<size_t>(cell) * C + c];
    return out;
  }
  void set(int cell, const std::array<float, C>& x) {
    for (int c = 0; c < C; ++c) values[static_cast<size_t>(cell) * C + c] = x[c];
  }
  size_t count_valid() const {
    size_t n = 0;
    for (uint8_t b : valid) n += b ? 1 : 0;
    return n;
  }
  friend bool operator==(const CellGrid&, const CellGrid&) = default;
};

// 3D coordinates per cell (meters, camera frame, z forward).
using PointImage = CellGrid<3>;
// 3D flow vector per cell; validity follows the frame-1 point grid.
using FlowGrid = CellGrid<3>;
// 2D pixel displacement per cell; validity marks cells usable for 2D evaluation.
using Flow2dGrid = CellGrid<2>;

struct RawCloud {
  std::vector<Vec3f> points;
};

// Pixelizes a cloud. Points with z <= 0, z > depth_max or outside the grid are
// dropped; collisions keep the smallest z (first in input order on equal z).
// When `source` is given it receives, per cell, the index of the winning
// input point or -1.
PointImage project_points(const RawCloud& cloud, const CameraIntrinsics& intr, double depth_max,
                          std::vector<int32_t>* source = nullptr);

// Coordinates of all valid cells in row-major order.
RawCloud lift_valid(const PointImage& img);

// Optical flow induced by a 3D flow: pixel(p + f) - pixel(p) with the
// unrounded pinhole map. Cells whose warped depth is not positive are invalid.
Flow2dGrid project_flow_2d(const PointImage& img, const FlowGrid& flow3d, const CameraIntrinsics& intr);

// Checks the grid invariants (positive depth on valid cells, exact zero fill
// on invalid cells, re-projection into the owning cell). Returns an empty
// string when they hold, otherwise a description of the first violation.
std::string check_point_image(const PointImage& img, const CameraIntrinsics& intr);

// Keeps cell (i*stride + stride/2, j*stride + stride/2) of every row/column.
template <int C>
CellGrid<C> select_cells(const CellGrid<C>& src, int stride);

// Number of centers select_cells keeps along an axis of length n.
int strided_extent(int n, int stride);

}  // namespace dgsf
