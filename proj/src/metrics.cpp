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

#include "dgsf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dgsf/errors.hpp"

namespace dgsf {

namespace {

constexpr double kTiny = 1e-12;

template <int C>
double cell_norm(const CellGrid<C>& g, int cell) {
  double s = 0.0;
  for (int k = 0; k < C; ++k) {
    const double x = g.values[static_cast<size_t>(cell) * C + k];
    s += x * x;
  }
  return std::sqrt(s);
}

template <int C>
double cell_error(const CellGrid<C>& a, const CellGrid<C>& b, int cell) {
  double s = 0.0;
  for (int k = 0; k < C; ++k) {
    const size_t i = static_cast<size_t>(cell) * C + k;
    const double d = static_cast<double>(a.values[i]) - static_cast<double>(b.values[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

std::vector<double> endpoint_errors(const FlowGrid& pred, const FlowGrid& gt, const std::vector<uint8_t>& valid) {
  DGSF_REQUIRE(pred.height == gt.height && pred.width == gt.width, "evaluate: prediction and ground truth differ in shape");
  DGSF_REQUIRE(valid.size() == static_cast<size_t>(gt.cells()), "evaluate: validity mask has the wrong size");
  std::vector<double> e(gt.cells(), 0.0);
  for (int c = 0; c < gt.cells(); ++c)
    if (valid[c]) e[c] = cell_error(pred, gt, c);
  return e;
}

EvalReport evaluate(const FlowGrid& pred, const FlowGrid& gt, const std::vector<uint8_t>& valid,
                    const CameraIntrinsics& intr, const PointImage& pc1) {
  const auto err = endpoint_errors(pred, gt, valid);
  DGSF_REQUIRE(pc1.height == gt.height && pc1.width == gt.width, "evaluate: point grid differs in shape");
  EvalReport r;
  double sum = 0.0;
  size_t strict = 0, relax = 0, out = 0;
  for (int c = 0; c < gt.cells(); ++c) {
    if (!valid[c]) continue;
    ++r.n_valid;
    const double e = err[c];
    const double rel = e / std::max(cell_norm(gt, c), kTiny);
    sum += e;
    strict += (e < 0.05 || rel < 0.05) ? 1 : 0;
    relax += (e < 0.10 || rel < 0.10) ? 1 : 0;
    out += (e > 0.30 || rel > 0.10) ? 1 : 0;
  }
  DGSF_REQUIRE(r.n_valid > 0, "evaluate: no valid cells");
  const double n = static_cast<double>(r.n_valid);
  r.epe3d = sum / n;
  r.acc_strict = static_cast<double>(strict) / n;
  r.acc_relax = static_cast<double>(relax) / n;
  r.outliers = static_cast<double>(out) / n;

  const Flow2dGrid p2 = project_flow_2d(pc1, pred, intr);
  const Flow2dGrid g2 = project_flow_2d(pc1, gt, intr);
  double sum2 = 0.0;
  size_t hit = 0;
  for (int c = 0; c < gt.cells(); ++c) {
    if (!valid[c] || !p2.valid[c] || !g2.valid[c]) continue;
    ++r.n_valid2d;
    const double e = cell_error(p2, g2, c);
    sum2 += e;
    hit += (e < 1.0 || e / std::max(cell_norm(g2, c), kTiny) < 0.05) ? 1 : 0;
  }
  if (r.n_valid2d) {
    r.epe2d = sum2 / static_cast<double>(r.n_valid2d);
    r.acc1px = static_cast<double>(hit) / static_cast<double>(r.n_valid2d);
  }
  return r;
}

std::string report_table(const std::vector<LabeledReport>& rows) {
  size_t w = 5;
  for (const auto& [name, _] : rows) w = std::max(w, name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %10s %8s %8s %9s %10s %8s %8s\n", static_cast<int>(w), "label", "EPE3D",
                "ACC.05", "ACC.10", "Outliers", "EPE2D", "ACC1px", "N");
  out += buf;
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %10.4f %8.4f %8.4f %9.4f %10.4f %8.4f %8zu\n", static_cast<int>(w),
                  name.c_str(), r.epe3d, r.acc_strict, r.acc_relax, r.outliers, r.epe2d, r.acc1px, r.n_valid);
    out += buf;
  }
  return out;
}

std::string report_csv(const std::vector<LabeledReport>& rows) {
  std::string out = "label,epe3d,acc_strict,acc_relax,outliers,epe2d,acc1px,n_valid,n_valid2d\n";
  char buf[512];
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%zu,%zu\n", name.c_str(), r.epe3d, r.acc_strict,
                  r.acc_relax, r.outliers, r.epe2d, r.acc1px, r.n_valid, r.n_valid2d);
    out += buf;
  }
  return out;
}

}  // namespace dgsf
