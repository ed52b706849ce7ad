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

#include "dgsf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "dgsf/io.hpp"
#include "dgsf/metrics.hpp"
#include "dgsf/simd.hpp"

namespace dgsf {

Vec3f RigidMotion::flow(const Vec3f& p) const {
  const double q[3] = {p[0] - center[0], p[1] - center[1], p[2] - center[2]};
  Vec3f out;
  for (int r = 0; r < 3; ++r) {
    double s = t[r];
    for (int c = 0; c < 3; ++c) s += (R[3 * r + c] - (r == c ? 1.0 : 0.0)) * q[c];
    out[r] = static_cast<float>(s);
  }
  return out;
}

namespace {

// Library-independent draws so scenes match across standard libraries.
struct Draw {
  std::mt19937_64 rng;
  double u01() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * u01(); }
  double normal() {
    const double u = std::max(u01(), 1e-300);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * u01());
  }
  std::array<double, 3> unit() {
    for (;;) {
      const double x = uniform(-1, 1), y = uniform(-1, 1), z = uniform(-1, 1);
      const double n = std::sqrt(x * x + y * y + z * z);
      if (n > 1e-3 && n <= 1.0) return {x / n, y / n, z / n};
    }
  }
};

RigidMotion draw_motion(Draw& d, const std::array<double, 3>& center, const SynthOptions& o) {
  RigidMotion m;
  m.center = center;
  if (o.motion_scale == 0.0) return m;
  const double lo = o.min_motion;
  const double angle = o.motion_scale * (5.0 * std::numbers::pi / 180.0) * d.uniform(lo, 1.0);
  const auto a = d.unit();
  const double c = std::cos(angle), s = std::sin(angle), k = 1.0 - c;
  m.R = {c + a[0] * a[0] * k,        a[0] * a[1] * k - a[2] * s, a[0] * a[2] * k + a[1] * s,
         a[1] * a[0] * k + a[2] * s, c + a[1] * a[1] * k,        a[1] * a[2] * k - a[0] * s,
         a[2] * a[0] * k - a[1] * s, a[2] * a[1] * k + a[0] * s, c + a[2] * a[2] * k};
  const auto dir = d.unit();
  const double mag = o.motion_scale * 0.5 * d.uniform(lo, 1.0);
  m.t = {dir[0] * mag, dir[1] * mag, dir[2] * mag};
  return m;
}

struct Shape {
  bool sphere = true;
  std::array<double, 3> c{};
  std::array<double, 3> half{};  // radius in [0] for spheres
  std::array<float, 3> color{};
};

// Smallest positive ray parameter, or +inf.
double hit(const Shape& s, const std::array<double, 3>& d) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (s.sphere) {
    const double b = d[0] * s.c[0] + d[1] * s.c[1] + d[2] * s.c[2];
    const double dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    const double cc = s.c[0] * s.c[0] + s.c[1] * s.c[1] + s.c[2] * s.c[2] - s.half[0] * s.half[0];
    const double disc = b * b - dd * cc;
    if (disc < 0.0) return kInf;
    const double t = (b - std::sqrt(disc)) / dd;
    return t > 0.0 ? t : kInf;
  }
  double t0 = 0.0, t1 = kInf;
  for (int k = 0; k < 3; ++k) {
    const double lo = s.c[k] - s.half[k], hi = s.c[k] + s.half[k];
    if (std::abs(d[k]) < 1e-12) {
      if (0.0 < lo || 0.0 > hi) return kInf;
      continue;
    }
    double a = lo / d[k], b = hi / d[k];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  return (t0 < t1 && t0 > 0.0) ? t0 : kInf;
}

std::array<float, 3> hue_color(double h) {
  const double r = 0.5 + 0.45 * std::cos(2 * std::numbers::pi * h);
  const double g = 0.5 + 0.45 * std::cos(2 * std::numbers::pi * (h - 1.0 / 3));
  const double b = 0.5 + 0.45 * std::cos(2 * std::numbers::pi * (h - 2.0 / 3));
  return {static_cast<float>(r), static_cast<float>(g), static_cast<float>(b)};
}

float texture(const Vec3f& p, const std::array<double, 3>& c) {
  return static_cast<float>(0.8 + 0.2 * std::sin(4.0 * (p[0] - c[0])) * std::cos(4.0 * (p[1] - c[1])));
}

float clamp01(double x) { return static_cast<float>(std::clamp(x, 0.0, 1.0)); }

}  // namespace

SyntheticScene synth(uint64_t seed, int height, int width, int n_objects, const SynthOptions& o) {
  DGSF_REQUIRE(height >= 16 && width >= 16, "synth: grid must be at least 16 x 16");
  DGSF_REQUIRE(n_objects >= 0 && n_objects <= 64, "synth: n_objects must be in [0, 64]");
  DGSF_REQUIRE(o.motion_scale >= 0.0 && o.min_motion >= 0.0 && o.min_motion <= 1.0 && o.noise >= 0.0 &&
                   o.depth_max > 1.0,
               "synth: bad options");
  Draw d{std::mt19937_64(seed)};
  SyntheticScene out;
  out.seed = seed;
  CameraIntrinsics& intr = out.scene.intr;
  intr.width = width;
  intr.height = height;
  intr.fx = intr.fy = 0.9 * width;
  intr.cx = 0.5 * (width - 1);
  intr.cy = 0.5 * (height - 1);
  intr.validate();

  // Background plane through (0, 0, zb) with a small tilt.
  const double zb = d.uniform(20.0, 25.0);
  const double tx = d.uniform(-0.15, 0.15), ty = d.uniform(-0.15, 0.15);
  out.motions.push_back(draw_motion(d, {0.0, 0.0, zb}, o));

  std::vector<Shape> shapes;
  for (int k = 0; k < n_objects; ++k) {
    Shape s;
    s.sphere = (k % 2) == 0;
    const double z = d.uniform(3.0, 14.0);
    const double u = d.uniform(0.15, 0.85) * width, v = d.uniform(0.15, 0.85) * height;
    s.c = {(u - intr.cx) / intr.fx * z, (v - intr.cy) / intr.fy * z, z};
    const double px = z / intr.fx;  // meters per pixel at this depth
    for (double& h : s.half) h = px * d.uniform(4.0, 9.0);
    s.color = hue_color(d.u01());
    shapes.push_back(s);
    out.motions.push_back(draw_motion(d, s.c, o));
  }

  RawCloud cloud;
  std::vector<int32_t> who;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const std::array<double, 3> ray{(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0};
      double best = zb / (1.0 - tx * ray[0] - ty * ray[1]);  // z = zb + tx*x + ty*y along the ray
      int owner = best > 0.0 && best <= 30.0 ? 0 : -1;
      if (owner < 0) best = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < shapes.size(); ++k) {
        const double t = hit(shapes[k], ray);
        if (t < best) {
          best = t;
          owner = static_cast<int>(k) + 1;
        }
      }
      if (owner < 0) continue;
      cloud.points.push_back(
          {static_cast<float>(best * ray[0]), static_cast<float>(best * ray[1]), static_cast<float>(best)});
      who.push_back(owner);
    }
  }

  std::vector<int32_t> src1;
  Scene& sc = out.scene;
  sc.pc1 = project_points(cloud, intr, o.depth_max, &src1);
  out.owner.assign(sc.pc1.cells(), -1);
  sc.gt_flow = FlowGrid(height, width);
  RawCloud moved;
  std::vector<int32_t> moved_cell;
  for (int c = 0; c < sc.pc1.cells(); ++c) {
    if (!sc.pc1.is_valid(c)) continue;
    out.owner[c] = who[src1[c]];
    const Vec3f p = sc.pc1.at(c);
    const Vec3f f = out.motions[out.owner[c]].flow(p);
    sc.gt_flow.set(c, f);
    sc.gt_flow.valid[c] = 1;
    moved.points.push_back({p[0] + f[0], p[1] + f[1], p[2] + f[2]});
    moved_cell.push_back(c);
  }
  std::vector<int32_t> src2;
  sc.pc2 = project_points(moved, intr, o.depth_max, &src2);

  auto color_of = [&](int cell) -> std::array<float, 3> {
    const int ow = out.owner[cell];
    const Vec3f p = sc.pc1.at(cell);
    if (ow == 0) {
      const float g = 0.45f * texture(p, out.motions[0].center);
      return {g, g, g};
    }
    const Shape& s = shapes[ow - 1];
    const float t = texture(p, s.c);
    return {s.color[0] * t, s.color[1] * t, s.color[2] * t};
  };
  auto paint = [&](RgbImage& img, const std::vector<int32_t>& source_cell) {
    img.height = height;
    img.width = width;
    img.rgb.assign(static_cast<size_t>(height) * width * 3, 0.0f);
    for (int c = 0; c < height * width; ++c) {
      std::array<float, 3> base{0.0f, 0.0f, 0.0f};
      if (source_cell[c] >= 0) base = color_of(source_cell[c]);
      for (int k = 0; k < 3; ++k) img.rgb[3 * static_cast<size_t>(c) + k] = clamp01(base[k] + o.noise * d.normal());
    }
  };
  std::vector<int32_t> cells1(sc.pc1.cells(), -1), cells2(sc.pc2.cells(), -1);
  for (int c = 0; c < sc.pc1.cells(); ++c)
    if (sc.pc1.is_valid(c)) cells1[c] = c;
  for (int c = 0; c < sc.pc2.cells(); ++c)
    if (src2[c] >= 0) cells2[c] = moved_cell[src2[c]];
  paint(sc.img1, cells1);
  paint(sc.img2, cells2);
  return out;
}

void write_scene(const std::filesystem::path& dir, const Scene& s) {
  std::filesystem::create_directories(dir);
  io::write_file(dir / "intrinsics.txt", io::encode_intrinsics(s.intr));
  io::write_file(dir / "pc1.grid", io::encode_grid(s.pc1));
  io::write_file(dir / "pc2.grid", io::encode_grid(s.pc2));
  io::write_file(dir / "img1.img", io::encode_image(s.img1));
  io::write_file(dir / "img2.img", io::encode_image(s.img2));
  if (s.gt_flow.cells() > 0) io::write_file(dir / "gt.flow", io::encode_grid(s.gt_flow));
}

Scene read_scene(const std::filesystem::path& dir) {
  Scene s;
  s.intr = io::decode_intrinsics(io::read_file(dir / "intrinsics.txt"));
  s.pc1 = io::decode_grid(io::read_file(dir / "pc1.grid"));
  s.pc2 = io::decode_grid(io::read_file(dir / "pc2.grid"));
  s.img1 = io::decode_image(io::read_file(dir / "img1.img"));
  s.img2 = io::decode_image(io::read_file(dir / "img2.img"));
  if (std::filesystem::exists(dir / "gt.flow")) s.gt_flow = io::decode_grid(io::read_file(dir / "gt.flow"));
  for (const PointImage* g : {&s.pc1, &s.pc2})
    DGSF_REQUIRE(g->height == s.intr.height && g->width == s.intr.width, "scene: grid does not match intrinsics");
  DGSF_REQUIRE(s.img1.height == s.intr.height && s.img1.width == s.intr.width && s.img2.height == s.intr.height &&
                   s.img2.width == s.intr.width,
               "scene: image does not match intrinsics");
  return s;
}

std::string error_map_ppm(const FlowGrid& pred, const FlowGrid& gt, const std::vector<uint8_t>& valid) {
  const auto err = endpoint_errors(pred, gt, valid);
  std::string out = "P6\n" + std::to_string(gt.width) + " " + std::to_string(gt.height) + "\n255\n";
  for (int c = 0; c < gt.cells(); ++c) {
    uint8_t rgb[3] = {0, 0, 0};
    if (valid[c]) {
      const Vec3f g = gt.at(c);
      const double norm = std::sqrt(double(g[0]) * g[0] + double(g[1]) * g[1] + double(g[2]) * g[2]);
      const double e = err[c];
      const bool ok = e < 0.10 || e / std::max(norm, 1e-12) < 0.10;
      const auto level = static_cast<uint8_t>(255.0 - 155.0 * std::min(1.0, e / 0.3));
      rgb[ok ? 1 : 0] = level;
    }
    out.append(reinterpret_cast<const char*>(rgb), 3);
  }
  return out;
}

PointImage bench_grid(int n, int height, int width, uint64_t seed) {
  DGSF_REQUIRE(height >= 1 && width >= 1 && n >= 0 && n <= height * width, "bench_grid: n does not fit the grid");
  Draw d{std::mt19937_64(seed)};
  std::vector<int32_t> cells(static_cast<size_t>(height) * width);
  for (size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int32_t>(i);
  for (int i = 0; i < n; ++i) {
    const size_t j = i + static_cast<size_t>(d.u01() * static_cast<double>(cells.size() - i));
    std::swap(cells[i], cells[std::min(j, cells.size() - 1)]);
  }
  const double f = 0.9 * width, cx = 0.5 * (width - 1), cy = 0.5 * (height - 1);
  PointImage g(height, width);
  for (int i = 0; i < n; ++i) {
    const int c = cells[i];
    const int u = c % width, v = c / width;
    const double z = 10.0 + 2.0 * std::sin(0.05 * u) * std::cos(0.07 * v);
    g.set(c, {static_cast<float>((u - cx) / f * z), static_cast<float>((v - cy) / f * z), static_cast<float>(z)});
    g.valid[c] = 1;
  }
  return g;
}

namespace {

template <typename F>
double median_ms(int repeats, F&& fn) {
  fn();  // warm-up
  std::vector<double> ms;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  return ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
}

}  // namespace

BenchReport bench_grouping(int n_points, const KernelSpec& spec, int repeats, uint64_t seed, int height, int width) {
  DGSF_REQUIRE(repeats >= 5, "bench: repeats must be >= 5");
  spec.validate();
  const PointImage g = bench_grid(n_points, height, width, seed);
  const KernelSpec whole = KernelSpec::whole_grid(height, width, spec.K, spec.max_dist);
  BenchReport r;
  r.n_points = n_points;
  r.height = height;
  r.width = width;
  r.spec = spec;
  r.repeats = repeats;
  r.simd = simd::level_name(simd::active_level());
  r.kernel_ms = median_ms(repeats, [&] { r.kernel_candidates = group_neighbors(g, g, spec).candidate_count; });
  r.brute_ms = median_ms(repeats, [&] { r.brute_candidates = brute_force_group(g, g, whole).candidate_count; });
  r.speedup = r.kernel_ms > 0.0 ? r.brute_ms / r.kernel_ms : 0.0;
  return r;
}

std::string bench_text(const BenchReport& r) {
  char buf[640];
  std::snprintf(buf, sizeof buf,
                "grid            %d x %d\n"
                "valid points    %d\n"
                "kernel          %dx%d K=%d\n"
                "repeats         %d (median, 1 warm-up)\n"
                "workers         %d\n"
                "simd            %s\n"
                "kernel_ms       %.3f\n"
                "brute_ms        %.3f\n"
                "speedup         %.2f\n"
                "kernel_cand     %llu\n"
                "brute_cand      %llu\n",
                r.width, r.height, r.n_points, r.spec.k_h, r.spec.k_w, r.spec.K, r.repeats, r.workers, r.simd.c_str(),
                r.kernel_ms, r.brute_ms, r.speedup, static_cast<unsigned long long>(r.kernel_candidates),
                static_cast<unsigned long long>(r.brute_candidates));
  return buf;
}

std::string bench_csv(const BenchReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "n_points,height,width,k_h,k_w,K,repeats,workers,simd,kernel_ms,brute_ms,speedup,kernel_candidates,"
                "brute_candidates\n%d,%d,%d,%d,%d,%d,%d,%d,%s,%.6f,%.6f,%.6f,%llu,%llu\n",
                r.n_points, r.height, r.width, r.spec.k_h, r.spec.k_w, r.spec.K, r.repeats, r.workers, r.simd.c_str(),
                r.kernel_ms, r.brute_ms, r.speedup, static_cast<unsigned long long>(r.kernel_candidates),
                static_cast<unsigned long long>(r.brute_candidates));
  return buf;
}

}  // namespace dgsf
