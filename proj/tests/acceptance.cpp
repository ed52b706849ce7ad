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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sys/wait.h>
#include <string>
#include <vector>

#include "dgsf/cost_volume.hpp"
#include "dgsf/harness.hpp"
#include "dgsf/io.hpp"
#include "dgsf/metrics.hpp"
#include "dgsf/network.hpp"
#include "dgsf/nn.hpp"
#include "grouping_oracle.hpp"
#include "test_util.hpp"

using namespace dgsf;
using dgsf::testing::uniform;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail, double secs) {
  std::printf("%s %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs `fn`, turning an exception into a failed line.
void criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
  const auto t0 = Clock::now();
  try {
    const auto [pass, detail] = fn();
    report(name, pass, detail, seconds_since(t0));
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what(), seconds_since(t0));
  }
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= x.size();
  my /= y.size();
  double num = 0, den = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    num += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    den += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return num / den;
}

double mean_epe(const std::vector<Scene>& scenes, const NetworkWeights<float>& w, const NetworkConfig& cfg) {
  double s = 0;
  for (const Scene& sc : scenes) s += evaluate(predict(sc, w, cfg).full, sc.gt_flow, sc.pc1.valid, sc.intr, sc.pc1).epe3d;
  return s / scenes.size();
}

double scene_epe(const Scene& sc, const NetworkWeights<float>& w, const NetworkConfig& cfg) {
  return evaluate(predict(sc, w, cfg).full, sc.gt_flow, sc.pc1.valid, sc.intr, sc.pc1).epe3d;
}

int run_child(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Shared toy-training setup: two large-motion 64 x 48 scenes, fixed seeds.
constexpr uint64_t kTrainSeed = 7;
constexpr int kTrainSteps = 200;

std::vector<Scene> training_scenes() {
  SynthOptions o;
  o.min_motion = 0.8;
  return {synth(100, 48, 64, 4, o).scene, synth(101, 48, 64, 4, o).scene};
}

NetworkConfig train_config(const char* mode) {
  NetworkConfig c;
  c.train_steps = kTrainSteps;
  apply_mode(c, mode);
  return c;
}

}  // namespace

int main() {
  const auto total0 = Clock::now();

  criterion("grouping-oracle", [] {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    int cases = 0, with_radius = 0, mismatches = 0;
    std::set<int> ks;
    for (int trial = 0; trial < 1200; ++trial) {
      const auto c = dgsf::testing::random_grouping_case(rng, trial);
      const NeighborTable want = dgsf::testing::grouping_oracle(c.centers, c.source, c.spec, c.stride);
      if (group_neighbors(c.centers, c.source, c.spec, c.stride) != want) ++mismatches;
      if (brute_force_group(c.centers, c.source, c.spec, c.stride) != want) ++mismatches;
      ++cases;
      with_radius += std::isfinite(c.spec.max_dist);
      ks.insert(c.spec.K);
    }
    const double secs = seconds_since(t0);
    return std::pair{mismatches == 0 && cases >= 1000 && ks.size() == 3 && with_radius > 0 && secs < 60.0,
                     fmt("%d cases (%d with radius), %d mismatches", cases, with_radius, mismatches)};
  });

  // Timing arms shared by the complexity and speedup criteria.
  std::vector<BenchReport> bench;
  criterion("complexity-witness", [&] {
    const KernelSpec spec{7, 9, 16};
    bool counts_ok = true;
    std::vector<double> ns, kernel_ms, brute_ms;
    for (int n : {1000, 4000, 16000, 56269}) {
      const BenchReport r = bench_grouping(n, spec, 5);
      bench.push_back(r);
      counts_ok &= r.kernel_candidates <= static_cast<uint64_t>(n) * spec.window_cells();
      counts_ok &= r.brute_candidates == static_cast<uint64_t>(n) * n;
      ns.push_back(n);
      kernel_ms.push_back(r.kernel_ms);
      brute_ms.push_back(r.brute_ms);
    }
    const double ks = slope(ns, kernel_ms), bs = slope(ns, brute_ms);
    return std::pair{counts_ok && ks <= 1.2,
                     fmt("kernel slope %.2f, brute slope %.2f, candidate bounds %s", ks, bs, counts_ok ? "hold" : "violated")};
  });

  criterion("grouping-speedup", [&] {
    if (bench.size() != 4) return std::pair{false, std::string("benchmark did not run")};
    const BenchReport& r = bench.back();
    return std::pair{r.speedup >= 10.0 && (r.kernel_ms + r.brute_ms) * 6 < 300e3,
                     fmt("n=%d kernel %.1f ms, brute %.1f ms, speedup %.1fx (%s, %d worker)", r.n_points, r.kernel_ms,
                         r.brute_ms, r.speedup, r.simd.c_str(), r.workers)};
  });

  // One model trained in the reference configuration serves the no-merge,
  // toy-training and fusion criteria.
  const std::vector<Scene> scenes = training_scenes();
  const NetworkConfig full_cfg = train_config("full");
  const auto train0 = Clock::now();
  std::optional<TrainResult> full;
  std::string train_error;
  try {
    full = toy_train(scenes, full_cfg, kTrainSeed);
  } catch (const std::exception& e) {
    train_error = e.what();
  }
  const double train_secs = seconds_since(train0);

  criterion("no-merge", [&] {
    std::mt19937_64 rng(11);
    const auto intr = dgsf::testing::make_intrinsics(16, 20);
    int mask_mismatch = 0, collisions = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const PointImage pc1 = dgsf::testing::random_point_image(rng, 16, 20, uniform(rng, 0.1, 1.0));
      FlowGrid flow(16, 20);
      flow.valid = pc1.valid;
      const Vec3f sink{static_cast<float>(uniform(rng, -1, 1)), static_cast<float>(uniform(rng, -1, 1)),
                       static_cast<float>(uniform(rng, 2, 8))};
      for (int c = 0; c < pc1.cells(); ++c) {
        if (!pc1.is_valid(c)) continue;
        const Vec3f p = pc1.at(c);
        if (trial % 3 == 0)
          flow.set(c, {sink[0] - p[0], sink[1] - p[1], sink[2] - p[2]});
        else
          flow.set(c, {static_cast<float>(uniform(rng, -3, 3)), static_cast<float>(uniform(rng, -3, 3)),
                       static_cast<float>(uniform(rng, -6, 3))});
      }
      const WarpResult r = warp(pc1, flow, intr);
      if (r.warped.valid != pc1.valid) ++mask_mismatch;
      std::set<std::pair<int, int>> targets;
      int in_frame = 0;
      for (int c = 0; c < pc1.cells(); ++c)
        if (r.index.in_frame[c]) targets.insert({r.index.uv[c].u, r.index.uv[c].v}), ++in_frame;
      collisions += static_cast<int>(targets.size()) < in_frame;
    }
    if (!full) return std::pair{false, "training failed: " + train_error};
    const Scene& sc = scenes.front();
    const double e_full = scene_epe(sc, full->weights, full_cfg);
    NetworkConfig c = full_cfg;
    apply_mode(c, "no-warp");
    const double e_nowarp = scene_epe(sc, full->weights, c);
    c = full_cfg;
    apply_mode(c, "reproject");
    const double e_reproj = scene_epe(sc, full->weights, c);
    const bool pass = mask_mismatch == 0 && collisions >= 166 && e_full < e_nowarp && e_full < e_reproj;
    return std::pair{pass, fmt("mask mismatches %d/500 (%d many-to-one); EPE3D full %.4f, no-warp %.4f, reproject %.4f",
                               mask_mismatch, collisions, e_full, e_nowarp, e_reproj)};
  });

  criterion("gradient-checks", [] {
    const auto t0 = Clock::now();
    const std::vector<std::pair<const char*, const char*>> suites{
        {DGSF_TEST_OPS, "GradCheck.*"},          {DGSF_TEST_PYRAMID, "*GradCheck*"},
        {DGSF_TEST_FUSION, "*GradCheck*"},       {DGSF_TEST_COST_VOLUME, "*GradCheck*"},
        {DGSF_TEST_NETWORK, "EndToEnd.*"},
    };
    std::string failed;
    for (const auto& [bin, filter] : suites)
      if (run_child(std::string(bin) + " --gtest_filter='" + filter + "'") != 0) failed += std::string(" ") + bin;
    const double secs = seconds_since(t0);
    return std::pair{failed.empty() && secs < 300.0,
                     failed.empty() ? fmt("%zu suites within 1e-4 over 20 seeds", suites.size()) : "failed:" + failed};
  });

  criterion("loss-closed-form", [&] {
    const Scene& s = scenes.front();
    const auto gt = gt_levels(s.gt_flow, 4);
    std::vector<FlowGrid> shifted;
    for (const auto& g : gt) {
      FlowGrid e = g;
      for (int c = 0; c < g.cells(); ++c) {
        if (!g.is_valid(c)) continue;
        const auto v = g.at(c);
        e.set(c, {v[0] + 0.03f, v[1] - 0.04f, v[2]});
      }
      shifted.push_back(e);
    }
    const std::vector<double> w{0.1, 0.2, 0.3, 0.8};
    const double zero = multi_scale_loss(gt, gt, w).total, uni = multi_scale_loss(shifted, gt, w).total;
    return std::pair{zero == 0.0 && std::abs(uni - 0.07) <= 1e-6, fmt("uniform 0.05 m error %.9f, zero error %g", uni, zero)};
  });

  criterion("toy-training", [&] {
    if (!full) return std::pair{false, "training failed: " + train_error};
    const auto& tr = full->trace;
    const double epe0 = mean_epe(scenes, make_weights<float>(full_cfg, kTrainSeed), full_cfg);
    const double epe1 = mean_epe(scenes, full->weights, full_cfg);
    NetworkConfig short_cfg = full_cfg;
    short_cfg.train_steps = 20;
    const auto rerun = toy_train(scenes, short_cfg, kTrainSeed);
    const bool same = std::equal(rerun.trace.begin(), rerun.trace.end(), tr.begin());
    const bool pass = tr.back() < 0.5 * tr.front() && epe1 < epe0 && same && train_secs < 900.0;
    return std::pair{pass, fmt("loss %.4f -> %.4f, EPE3D %.4f -> %.4f, rerun prefix %s, %d steps in %.0f s", tr.front(),
                               tr.back(), epe0, epe1, same ? "identical" : "differs", kTrainSteps, train_secs)};
  });

  criterion("fusion-ablation", [&] {
    if (!full) return std::pair{false, "training failed: " + train_error};
    const double att = mean_epe(scenes, full->weights, full_cfg);
    const NetworkConfig cc = train_config("concat"), nc = train_config("no-fusion");
    const double concat = mean_epe(scenes, toy_train(scenes, cc, kTrainSeed).weights, cc);
    const double none = mean_epe(scenes, toy_train(scenes, nc, kTrainSeed).weights, nc);
    return std::pair{att <= concat && concat <= none,
                     fmt("EPE3D attentive %.4f, concat %.4f, no-fusion %.4f", att, concat, none)};
  });

  criterion("metric-two-cell", [] {
    const CameraIntrinsics intr = dgsf::testing::make_intrinsics(1, 2);
    PointImage pc1(1, 2);
    FlowGrid gt(1, 2), pred(1, 2);
    for (int c = 0; c < 2; ++c) {
      pc1.valid[c] = gt.valid[c] = pred.valid[c] = 1;
      pc1.set(c, {static_cast<float>((c - intr.cx) / intr.fx * 5.0), 0.0f, 5.0f});
      gt.set(c, {0.0f, 0.0f, 1.0f});
    }
    pred.set(0, {0.0f, 0.04f, 1.0f});
    pred.set(1, {0.0f, 0.20f, 1.0f});
    const EvalReport r = evaluate(pred, gt, {1, 1}, intr, pc1);
    const bool pass = std::abs(r.epe3d - 0.12) <= 1e-8 && r.acc_strict == 0.5 && r.acc_relax == 0.5 && r.outliers == 0.5;
    return std::pair{pass, fmt("EPE3D %.9f, ACC.05 %g, ACC.10 %g, Outliers %g", r.epe3d, r.acc_strict, r.acc_relax,
                               r.outliers)};
  });

  criterion("round-trip", [&] {
    std::mt19937_64 rng(77);
    const CameraIntrinsics k = dgsf::testing::make_intrinsics(24, 32);
    int perm_fail = 0, byte_fail = 0;
    for (int trial = 0; trial < 200; ++trial) {
      // One point per chosen pixel ray, so the z-buffer keeps every point.
      RawCloud cloud;
      for (int c = 0; c < k.width * k.height; ++c) {
        if (uniform(rng, 0, 1) > 0.3) continue;
        const double z = uniform(rng, 1, 30);
        const int u = c % k.width, v = c / k.width;
        cloud.points.push_back({static_cast<float>((u - k.cx) / k.fx * z), static_cast<float>((v - k.cy) / k.fy * z),
                                static_cast<float>(z)});
      }
      std::shuffle(cloud.points.begin(), cloud.points.end(), rng);
      const PointImage grid = project_points(cloud, k, 35.0);
      auto back = lift_valid(grid).points;
      auto orig = cloud.points;
      std::sort(back.begin(), back.end());
      std::sort(orig.begin(), orig.end());
      perm_fail += back != orig;

      const std::string cb = io::encode_cloud(cloud), gb = io::encode_grid(grid);
      byte_fail += io::encode_cloud(io::decode_cloud(cb)) != cb;
      byte_fail += io::encode_grid(io::decode_grid(gb)) != gb;
    }
    const Scene& s = scenes.front();
    for (const RgbImage* img : {&s.img1, &s.img2}) {
      const std::string b = io::encode_image(*img);
      byte_fail += io::encode_image(io::decode_image(b)) != b;
    }
    const std::string fb = io::encode_grid(s.gt_flow), ib = io::encode_intrinsics(s.intr);
    byte_fail += io::encode_grid(io::decode_grid(fb)) != fb;
    byte_fail += io::encode_intrinsics(io::decode_intrinsics(ib)) != ib;
    const std::string cfg = full_cfg.to_text();
    byte_fail += NetworkConfig::parse(cfg).to_text() != cfg;
    auto w = make_weights<float>(full_cfg, 3);
    const std::string wb = encode_weights(export_params(w.params()));
    byte_fail += encode_weights(decode_weights(wb)) != wb;
    return std::pair{perm_fail == 0 && byte_fail == 0,
                     fmt("permutation failures %d/200, byte-unstable formats %d", perm_fail, byte_fail)};
  });

  std::printf("%d failed, total %.0f s\n", g_failures, seconds_since(total0));
  return g_failures == 0 ? 0 : 1;
}
