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

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dgsf/grid.hpp"

namespace dgsf {

struct EvalReport {
  double epe3d = 0.0;       // meters
  double acc_strict = 0.0;  // e < 0.05 or r < 0.05
  double acc_relax = 0.0;   // e < 0.10 or r < 0.10
  double outliers = 0.0;    // e > 0.30 or r > 0.10
  double epe2d = 0.0;       // pixels
  double acc1px = 0.0;      // e2d < 1 or r2d < 0.05
  size_t n_valid = 0;
  size_t n_valid2d = 0;     // cells usable for the 2D terms
};

// Per-cell absolute error e and relative error r = e / max(|gt|, 1e-12),
// averaged over cells with valid[c] set. Throws InputError when none are.
EvalReport evaluate(const FlowGrid& pred, const FlowGrid& gt, const std::vector<uint8_t>& valid,
                    const CameraIntrinsics& intr, const PointImage& pc1);

// Per-cell 3D endpoint error; 0 on cells outside `valid`.
std::vector<double> endpoint_errors(const FlowGrid& pred, const FlowGrid& gt, const std::vector<uint8_t>& valid);

using LabeledReport = std::pair<std::string, EvalReport>;

std::string report_table(const std::vector<LabeledReport>& rows);
std::string report_csv(const std::vector<LabeledReport>& rows);

}  // namespace dgsf
