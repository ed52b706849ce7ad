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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "dgsf/errors.hpp"
#include "dgsf/grid.hpp"
#include "test_util.hpp"

using namespace dgsf;
using dgsf::testing::uniform;

namespace {

CameraIntrinsics small_camera() {
  CameraIntrinsics k;
  k.fx = k.fy = 100.0;
  k.cx = 32.0;
  k.cy = 24.0;
  k.width = 64;
  k.height = 48;
  return k;
}

RawCloud random_cloud(std::mt19937_64& rng, int n) {
  RawCloud c;
  for (int i = 0; i < n; ++i)
    c.points.push_back({static_cast<float>(uniform(rng, -4, 4)), static_cast<float>(uniform(rng, -3, 3)),
                        static_cast<float>(uniform(rng, -1, 40))});
  return c;
}

}  // namespace

TEST(ProjectPoints, OnAxisPointLandsOnPrincipalPoint) {
  const auto img = project_points({{{0.0f, 0.0f, 2.0f}}}, small_camera(), 35.0);
  EXPECT_TRUE(img.is_valid(img.index(32, 24)));
  EXPECT_EQ(img.count_valid(), 1u);
}

TEST(ProjectPoints, DropsPointsBeyondDepthLimit) {
  const auto img = project_points({{{0.0f, 0.0f, 40.0f}}}, small_camera(), 35.0);
  EXPECT_EQ(img.count_valid(), 0u);
}

TEST(ProjectPoints, DropsBehindCameraAndOffGrid) {
  const auto img = project_points({{{0.0f, 0.0f, -1.0f}, {0.0f, 0.0f, 0.0f}, {100.0f, 0.0f, 1.0f}}}, small_camera(), 35.0);
  EXPECT_EQ(img.count_valid(), 0u);
}

TEST(ProjectPoints, CollisionKeepsNearestDepth) {
  const auto img = project_points({{{0.2f, 0.0f, 2.0f}, {0.15f, 0.0f, 1.5f}}}, small_camera(), 35.0);
  ASSERT_EQ(img.count_valid(), 1u);
  for (int c = 0; c < img.cells(); ++c)
    if (img.is_valid(c)) {
      EXPECT_EQ(img.at(c), (Vec3f{0.15f, 0.0f, 1.5f}));
    }
}

TEST(ProjectPoints, EqualDepthKeepsFirstPoint) {
  // Both land in cell (32, 24); same z.
  const auto img = project_points({{{0.001f, 0.0f, 2.0f}, {-0.001f, 0.0f, 2.0f}}}, small_camera(), 35.0);
  EXPECT_EQ(img.at(img.index(32, 24))[0], 0.001f);
}

TEST(ProjectPoints, MatchesMinDepthOracleOnRandomClouds) {
  std::mt19937_64 rng(11);
  const auto k = small_camera();
  for (int trial = 0; trial < 20; ++trial) {
    const RawCloud cloud = random_cloud(rng, 3000);
    std::vector<int32_t> src;
    const PointImage img = project_points(cloud, k, 35.0, &src);
    // Oracle: bucket every surviving point by its rounded pixel, keep min z.
    std::map<int, float> min_z;
    for (const auto& p : cloud.points) {
      if (p[2] <= 0.0f || p[2] > 35.0f) continue;
      const int u = static_cast<int>(std::floor(k.fx * double(p[0]) / p[2] + k.cx + 0.5));
      const int v = static_cast<int>(std::floor(k.fy * double(p[1]) / p[2] + k.cy + 0.5));
      if (u < 0 || v < 0 || u >= k.width || v >= k.height) continue;
      const int c = v * k.width + u;
      auto it = min_z.find(c);
      if (it == min_z.end() || p[2] < it->second) min_z[c] = p[2];
    }
    ASSERT_EQ(img.count_valid(), min_z.size());
    for (const auto& [c, z] : min_z) {
      ASSERT_TRUE(img.is_valid(c));
      EXPECT_EQ(img.at(c)[2], z);
      EXPECT_EQ(cloud.points[src[c]], img.at(c));
    }
    EXPECT_EQ(check_point_image(img, k), "");
  }
}

TEST(ProjectPoints, InvalidCellsHoldZeroSentinel) {
  std::mt19937_64 rng(3);
  const PointImage img = project_points(random_cloud(rng, 500), small_camera(), 35.0);
  for (int c = 0; c < img.cells(); ++c)
    if (!img.is_valid(c)) {
      EXPECT_EQ(img.at(c), (Vec3f{0, 0, 0}));
    }
}

TEST(LiftValid, EmptyGridGivesEmptyCloud) {
  EXPECT_TRUE(lift_valid(PointImage(4, 5)).points.empty());
}

TEST(LiftValid, SingletonCell) {
  PointImage img(3, 3);
  img.set(4, {1, 2, 3});
  img.valid[4] = 1;
  const auto c = lift_valid(img);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0], (Vec3f{1, 2, 3}));
}

TEST(LiftValid, CollisionFreeRoundTripIsPermutation) {
  std::mt19937_64 rng(5);
  const auto k = small_camera();
  for (int trial = 0; trial < 50; ++trial) {
    // One point per chosen pixel ray, so nothing collides.
    RawCloud cloud;
    for (int c = 0; c < k.width * k.height; ++c) {
      if (uniform(rng, 0, 1) > 0.2) continue;
      const double z = uniform(rng, 1, 30);
      const int u = c % k.width, v = c / k.width;
      cloud.points.push_back({static_cast<float>((u - k.cx) / k.fx * z), static_cast<float>((v - k.cy) / k.fy * z),
                              static_cast<float>(z)});
    }
    std::shuffle(cloud.points.begin(), cloud.points.end(), rng);
    auto back = lift_valid(project_points(cloud, k, 35.0)).points;
    auto orig = cloud.points;
    std::sort(back.begin(), back.end());
    std::sort(orig.begin(), orig.end());
    EXPECT_EQ(back, orig);
  }
}

TEST(ProjectFlow2d, ZeroFlowGivesZero) {
  std::mt19937_64 rng(1);
  const auto img = project_points(random_cloud(rng, 300), small_camera(), 35.0);
  FlowGrid f(img.height, img.width);
  f.valid = img.valid;
  const auto f2 = project_flow_2d(img, f, small_camera());
  for (float x : f2.values) EXPECT_EQ(x, 0.0f);
}

TEST(ProjectFlow2d, MotionAlongOpticalRayIsInvisible) {
  PointImage img(48, 64);
  img.set(img.index(32, 24), {0, 0, 2});
  img.valid[img.index(32, 24)] = 1;
  FlowGrid f(48, 64);
  f.set(img.index(32, 24), {0, 0, 0.7f});
  const auto f2 = project_flow_2d(img, f, small_camera());
  EXPECT_EQ(f2.at(img.index(32, 24)), (std::array<float, 2>{0, 0}));
}

TEST(ProjectFlow2d, LateralShiftMatchesHandArithmetic) {
  PointImage img(48, 64);
  const int c = img.index(32, 24);
  img.set(c, {0, 0, 2});
  img.valid[c] = 1;
  FlowGrid f(48, 64);
  f.set(c, {0.2f, 0, 0});
  const auto f2 = project_flow_2d(img, f, small_camera());
  // 100 * 0.2 / 2 = 10 pixels.
  EXPECT_NEAR(f2.at(c)[0], 10.0f, 1e-5);
  EXPECT_NEAR(f2.at(c)[1], 0.0f, 1e-6);
  EXPECT_TRUE(f2.is_valid(c));
}

TEST(ProjectFlow2d, MatchesScalarOracleAndFlagsNegativeDepth) {
  std::mt19937_64 rng(9);
  const auto k = small_camera();
  const auto img = project_points(random_cloud(rng, 800), k, 35.0);
  FlowGrid f(img.height, img.width);
  for (int c = 0; c < f.cells(); ++c)
    if (img.is_valid(c)) {
      f.set(c, {static_cast<float>(uniform(rng, -1, 1)), static_cast<float>(uniform(rng, -1, 1)),
                static_cast<float>(uniform(rng, -40, 1))});
      f.valid[c] = 1;
    }
  const auto f2 = project_flow_2d(img, f, k);
  int flagged = 0;
  for (int c = 0; c < img.cells(); ++c) {
    if (!img.is_valid(c)) {
      EXPECT_FALSE(f2.is_valid(c));
      continue;
    }
    const auto p = img.at(c);
    const auto d = f.at(c);
    const double zw = double(p[2]) + d[2];
    if (zw <= 0) {
      EXPECT_FALSE(f2.is_valid(c));
      ++flagged;
      continue;
    }
    const double du = (k.fx * (double(p[0]) + d[0]) / zw + k.cx) - (k.fx * double(p[0]) / p[2] + k.cx);
    const double dv = (k.fy * (double(p[1]) + d[1]) / zw + k.cy) - (k.fy * double(p[1]) / p[2] + k.cy);
    EXPECT_NEAR(f2.at(c)[0], du, 1e-3 + 1e-5 * std::abs(du));
    EXPECT_NEAR(f2.at(c)[1], dv, 1e-3 + 1e-5 * std::abs(dv));
  }
  EXPECT_GT(flagged, 0);
}

TEST(CheckPointImage, DetectsEachViolation) {
  const auto k = small_camera();
  PointImage img(48, 64);
  EXPECT_EQ(check_point_image(img, k), "");
  img.set(0, {0.1f, 0, 1});  // invalid cell with nonzero coordinates
  EXPECT_NE(check_point_image(img, k), "");
  img = PointImage(48, 64);
  img.valid[img.index(32, 24)] = 1;
  img.set(img.index(32, 24), {0, 0, -1});  // non-positive depth
  EXPECT_NE(check_point_image(img, k), "");
  img.set(img.index(32, 24), {1, 0, 1});  // projects elsewhere
  EXPECT_NE(check_point_image(img, k), "");
}

TEST(Intrinsics, ValidateRejectsBadValues) {
  CameraIntrinsics k = small_camera();
  k.fx = 0;
  EXPECT_THROW(k.validate(), InputError);
  k = small_camera();
  k.cx = 64;
  EXPECT_THROW(k.validate(), InputError);
  EXPECT_NO_THROW(small_camera().validate());
}

TEST(SelectCells, StrideTwoOnFourByFour) {
  PointImage img(4, 4);
  for (int c = 0; c < 16; ++c) {
    img.set(c, {float(c), 0, 1});
    img.valid[c] = 1;
  }
  const auto s = select_cells(img, 2);
  ASSERT_EQ(s.height, 2);
  ASSERT_EQ(s.width, 2);
  EXPECT_EQ(s.at(0)[0], 5.0f);   // (1,1)
  EXPECT_EQ(s.at(1)[0], 7.0f);   // (3,1)
  EXPECT_EQ(s.at(2)[0], 13.0f);  // (1,3)
  EXPECT_EQ(s.at(3)[0], 15.0f);  // (3,3)
}

TEST(SelectCells, StridedIntrinsicsKeepSelfConsistency) {
  std::mt19937_64 rng(21);
  const PointImage img = dgsf::testing::random_point_image(rng, 48, 64, 0.7);
  const auto k = dgsf::testing::make_intrinsics(48, 64);
  ASSERT_EQ(check_point_image(img, k), "");
  PointImage cur = img;
  CameraIntrinsics kc = k;
  for (int l = 0; l < 4; ++l) {
    cur = select_cells(cur, 2);
    kc = kc.strided(2);
    EXPECT_EQ(cur.height, kc.height);
    EXPECT_EQ(cur.width, kc.width);
    EXPECT_EQ(check_point_image(cur, kc), "") << "level " << l;
  }
}

TEST(SelectCells, ExtentCountsKeptCenters) {
  EXPECT_EQ(strided_extent(4, 2), 2);
  EXPECT_EQ(strided_extent(5, 2), 2);
  EXPECT_EQ(strided_extent(1, 2), 0);
  EXPECT_EQ(strided_extent(6, 4), 1);
  EXPECT_EQ(strided_extent(7, 4), 2);
}
