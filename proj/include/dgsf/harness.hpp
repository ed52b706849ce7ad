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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dgsf/grouping.hpp"
#include "dgsf/network.hpp"

namespace dgsf {

// p -> R (p - center) + center + t
struct RigidMotion {
  std::array<double, 9> R{1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::array<double, 3> center{};
  std::array<double, 3> t{};

  // (R - I)(p - center) + t, exactly zero for the identity.
  Vec3f flow(const Vec3f& p) const;
};

struct SynthOptions {
  double motion_scale = 1.0;    // 1 -> rotations up to 5 degrees, translations up to 0.5 m
  double min_motion = 0.0;      // lower end of the magnitude draw, as a fraction of the maximum
  double noise = 0.02;          // image noise sigma
  double depth_max = 35.0;
};

struct SyntheticScene {
  Scene scene;
  uint64_t seed = 0;
  std::vector<RigidMotion> motions;  // [0] background, then one per object
  std::vector<int32_t> owner;        // per pc1 cell: motion index or -1
};

// Background plane plus n_objects spheres and boxes at 1-30 m depth.
SyntheticScene synth(uint64_t seed, int height, int width, int n_objects, const SynthOptions& opts = {});

// Directory layout: intrinsics.txt, pc1.grid, pc2.grid, img1.img, img2.img,
// and gt.flow when ground truth is present.
void write_scene(const std::filesystem::path& dir, const Scene& scene);
Scene read_scene(const std::filesystem::path& dir);

// Binary PPM: green where the cell meets the 0.10 accuracy threshold, red
// where it does not, black on invalid cells. Brightness falls with error.
std::string error_map_ppm(const FlowGrid& pred, const FlowGrid& gt, const std::vector<uint8_t>& valid);

// height x width grid with exactly n valid cells on a smooth surface.
PointImage bench_grid(int n, int height, int width, uint64_t seed);

struct BenchReport {
  int n_points = 0;
  int height = 0;
  int width = 0;
  KernelSpec spec;
  int repeats = 0;
  int workers = 1;
  std::string simd;
  double kernel_ms = 0.0;  // medians
  double brute_ms = 0.0;
  double speedup = 0.0;
  uint64_t kernel_candidates = 0;
  uint64_t brute_candidates = 0;
};

// Times group_neighbors (spec) against brute_force_group over the whole grid
// on bench_grid(n). One untimed warm-up per arm, then `repeats` timed runs.
BenchReport bench_grouping(int n_points, const KernelSpec& spec, int repeats, uint64_t seed = 1, int height = 270,
                           int width = 480);

std::string bench_text(const BenchReport& r);
std::string bench_csv(const BenchReport& r);

}  // namespace dgsf
