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

// Cross-frame correlation. Frame-1 points are displaced by the coarse flow
// but stay in their own slots; the projected pixel of each displaced point
// is kept separately and only used to place the search window on frame 2.

#include <cstdint>
#include <vector>

#include "dgsf/grid.hpp"
#include "dgsf/grouping.hpp"
#include "dgsf/nn.hpp"

namespace dgsf {

struct WarpIndex {
  int height = 0;
  int width = 0;
  std::vector<Pixel> uv;          // (-1, -1) where undefined
  std::vector<uint8_t> in_frame;  // valid slot, positive depth, pixel inside the grid
  friend bool operator==(const WarpIndex&, const WarpIndex&) = default;
};

struct WarpResult {
  PointImage warped;  // p + f at the original slot, same mask as the input
  WarpIndex index;
};

// Pixel rule applied to every valid slot of `warped`.
WarpIndex warp_index(const PointImage& warped, const CameraIntrinsics& intr);

// Each cell indexes itself; in_frame follows validity.
WarpIndex identity_index(const PointImage& points);

WarpResult warp(const PointImage& pc1, const FlowGrid& flow, const CameraIntrinsics& intr);

template <typename T>
struct CorrelationWeights {
  MlpWeights<T> att1;  // dir(3) ++ dist(1) ++ f1 ++ f2 -> 1
  MlpWeights<T> val;   // f2 ++ dir(3) -> C'
  MlpWeights<T> att2;  // dir(3) ++ dist(1) ++ f1 ++ e -> 1
};

template <typename T>
struct FlowEmbedding {
  Var<T> e;                       // cells x C'
  std::vector<uint8_t> valid;     // frame-1 validity
  std::vector<uint8_t> flagged;   // valid slots without correspondence; e is zero there
  NeighborTable stage1;           // frame-2 neighbors of the grid that was correlated
  NeighborTable stage2;           // self neighbors
  Var<T> attention1;              // (n*K x 1) stage-1 weights
  Var<T> attention2;
  int computed = 0;               // slots whose embedding was computed
  int copied = 0;                 // slots that copied another slot's embedding
};

// `warped` holds the displaced frame-1 coordinates (cells x 3). Gradients
// reach it through the direction and distance inputs; the neighbor choice
// itself is discrete.
template <typename T>
FlowEmbedding<T> correlate(const PointImage& pc1, Var<T> warped, const WarpIndex& widx, const PointImage& pc2,
                           Var<T> f1, Var<T> f2, const KernelSpec& spec, const KernelSpec& spec2,
                           const CorrelationWeights<T>& w);

// Search centered at each slot's own cell with undisplaced coordinates.
template <typename T>
FlowEmbedding<T> correlate_no_warp(const PointImage& pc1, const PointImage& pc2, Var<T> f1, Var<T> f2,
                                   const KernelSpec& spec, const KernelSpec& spec2, const CorrelationWeights<T>& w);

// Displaced points are re-binned into a fresh grid (nearest depth wins a
// cell), correlated there, and every slot then reads the embedding of the
// cell it landed in. Losing slots therefore copy the winner's embedding.
template <typename T>
FlowEmbedding<T> correlate_reprojected(const PointImage& pc1, Var<T> warped, const WarpIndex& widx,
                                       const PointImage& pc2, Var<T> f1, Var<T> f2, const KernelSpec& spec,
                                       const KernelSpec& spec2, const CorrelationWeights<T>& w);

template <typename T>
struct Prediction {
  Var<T> residual;  // cells x 3, zero on invalid and flagged slots
  Var<T> refined;   // cells x C, zero on invalid slots
};

template <typename T>
Prediction<T> predict_residual(Var<T> f1, const FlowEmbedding<T>& emb, Var<T> up_emb, const MlpWeights<T>& w_pred,
                               const MlpWeights<T>& w_flow);

template <typename T>
Var<T> refine(Var<T> coarse, Var<T> residual);

// Plain elementwise sum; validity follows `coarse`.
FlowGrid refine(const FlowGrid& coarse, const FlowGrid& residual);

}  // namespace dgsf
