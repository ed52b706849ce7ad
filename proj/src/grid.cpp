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

#include "dgsf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "dgsf/errors.hpp"

namespace dgsf {

void CameraIntrinsics::validate() const {
  DGSF_REQUIRE(std::isfinite(fx) && fx > 0.0, "intrinsics: fx must be positive");
  DGSF_REQUIRE(std::isfinite(fy) && fy > 0.0, "intrinsics: fy must be positive");
  DGSF_REQUIRE(width > 0 && height > 0, "intrinsics: width and height must be positive");
  DGSF_REQUIRE(cx >= 0.0 && cx < width, "intrinsics: cx must lie in [0, width)");
  DGSF_REQUIRE(cy >= 0.0 && cy < height, "intrinsics: cy must lie in [0, height)");
}

CameraIntrinsics CameraIntrinsics::strided(int stride) const {
  DGSF_REQUIRE(stride >= 1, "intrinsics: stride must be >= 1");
  const double offset = static_cast<double>(stride / 2);
  CameraIntrinsics out;
  out.fx = fx / stride;
  out.fy = fy / stride;
  out.cx = (cx - offset) / stride;
  out.cy = (cy - offset) / stride;
  out.width = strided_extent(width, stride);
  out.height = strided_extent(height, stride);
  return out;
}

std::array<double, 2> project_continuous(const CameraIntrinsics& intr, double x, double y, double z) {
  return {intr.fx * x / z + intr.cx, intr.fy * y / z + intr.cy};
}

Pixel pixel_of(const CameraIntrinsics& intr, double x, double y, double z) {
  const auto uv = project_continuous(intr, x, y, z);
  // Clamp before the integer conversion; anything this far out is off-grid anyway.
  const double u = std::clamp(std::floor(uv[0] + 0.5), -1e9, 1e9);
  const double v = std::clamp(std::floor(uv[1] + 0.5), -1e9, 1e9);
  return {static_cast<int>(u), static_cast<int>(v)};
}

PointImage project_points(const RawCloud& cloud, const CameraIntrinsics& intr, double depth_max,
                          std::vector<int32_t>* source) {
  intr.validate();
  DGSF_REQUIRE(depth_max > 0.0, "project_points: depth_max must be positive");
  PointImage img(intr.height, intr.width);
  if (source) source->assign(img.cells(), -1);
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3f& p = cloud.points[i];
    DGSF_REQUIRE(std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]),
                 "project_points: non-finite coordinate");
    if (!(p[2] > 0.0f) || p[2] > depth_max) continue;
    const Pixel px = pixel_of(intr, p[0], p[1], p[2]);
    if (!img.in_bounds(px.u, px.v)) continue;
    const int cell = img.index(px.u, px.v);
    if (img.is_valid(cell) && img.at(cell)[2] <= p[2]) continue;
    img.set(cell, p);
    img.valid[cell] = 1;
    if (source) (*source)[cell] = static_cast<int32_t>(i);
  }
  return img;
}

RawCloud lift_valid(const PointImage& img) {
  RawCloud out;
  out.points.reserve(img.count_valid());
  for (int cell = 0; cell < img.cells(); ++cell) {
    if (img.is_valid(cell)) out.points.push_back(img.at(cell));
  }
  return out;
}

Flow2dGrid project_flow_2d(const PointImage& img, const FlowGrid& flow3d, const CameraIntrinsics& intr) {
  DGSF_REQUIRE(img.height == flow3d.height && img.width == flow3d.width,
               "project_flow_2d: flow shape does not match point grid");
  Flow2dGrid out(img.height, img.width);
  for (int cell = 0; cell < img.cells(); ++cell) {
    if (!img.is_valid(cell)) continue;
    const Vec3f p = img.at(cell);
    const Vec3f f = flow3d.at(cell);
    const double wz = static_cast<double>(p[2]) + f[2];
    if (!(wz > 0.0)) continue;
    const auto a = project_continuous(intr, p[0], p[1], p[2]);
    const auto b = project_continuous(intr, static_cast<double>(p[0]) + f[0], static_cast<double>(p[1]) + f[1], wz);
    out.set(cell, {static_cast<float>(b[0] - a[0]), static_cast<float>(b[1] - a[1])});
    out.valid[cell] = 1;
  }
  return out;
}

std::string check_point_image(const PointImage& img, const CameraIntrinsics& intr) {
  if (img.height != intr.height || img.width != intr.width) return "grid shape differs from intrinsics";
  if (img.values.size() != static_cast<size_t>(img.cells()) * 3 || img.valid.size() != static_cast<size_t>(img.cells()))
    return "buffer sizes inconsistent with shape";
  for (int cell = 0; cell < img.cells(); ++cell) {
    const Vec3f p = img.at(cell);
    std::ostringstream where;
    where << "cell " << cell << " (u=" << img.pixel(cell).u << ", v=" << img.pixel(cell).v << ")";
    if (!img.is_valid(cell)) {
      if (p[0] != 0.0f || p[1] != 0.0f || p[2] != 0.0f) return where.str() + ": invalid cell is not (0,0,0)";
      continue;
    }
    if (!(p[2] > 0.0f)) return where.str() + ": valid cell has non-positive depth";
    if (pixel_of(intr, p[0], p[1], p[2]) != img.pixel(cell)) return where.str() + ": point does not re-project into its cell";
  }
  return {};
}

int strided_extent(int n, int stride) {
  const int offset = stride / 2;
  if (n <= offset) return 0;
  return (n - offset + stride - 1) / stride;
}

template <int C>
CellGrid<C> select_cells(const CellGrid<C>& src, int stride) {
  DGSF_REQUIRE(stride >= 1, "select_cells: stride must be >= 1");
  const int offset = stride / 2;
  CellGrid<C> out(strided_extent(src.height, stride), strided_extent(src.width, stride));
  for (int i = 0; i < out.height; ++i) {
    for (int j = 0; j < out.width; ++j) {
      const int from = src.index(j * stride + offset, i * stride + offset);
      const int to = out.index(j, i);
      out.set(to, src.at(from));
      out.valid[to] = src.valid[from];
    }
  }
  return out;
}

template CellGrid<2> select_cells(const CellGrid<2>&, int);
template CellGrid<3> select_cells(const CellGrid<3>&, int);

}  // namespace dgsf
