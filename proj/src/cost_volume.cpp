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

#include "dgsf/cost_volume.hpp"

#include "dgsf/pyramid.hpp"

namespace dgsf {

WarpIndex warp_index(const PointImage& warped, const CameraIntrinsics& intr) {
  DGSF_REQUIRE(intr.width == warped.width && intr.height == warped.height, "warp_index: intrinsics do not match grid");
  WarpIndex w;
  w.height = warped.height;
  w.width = warped.width;
  w.uv.assign(warped.cells(), Pixel{-1, -1});
  w.in_frame.assign(warped.cells(), 0);
  for (int c = 0; c < warped.cells(); ++c) {
    if (!warped.is_valid(c)) continue;
    const Vec3f p = warped.at(c);
    if (!(p[2] > 0.0f)) continue;
    const Pixel px = pixel_of(intr, p[0], p[1], p[2]);
    w.uv[c] = px;
    w.in_frame[c] = warped.in_bounds(px.u, px.v) ? 1 : 0;
  }
  return w;
}

WarpIndex identity_index(const PointImage& points) {
  WarpIndex w;
  w.height = points.height;
  w.width = points.width;
  w.uv.assign(points.cells(), Pixel{-1, -1});
  w.in_frame = points.valid;
  for (int c = 0; c < points.cells(); ++c)
    if (points.is_valid(c)) w.uv[c] = points.pixel(c);
  return w;
}

WarpResult warp(const PointImage& pc1, const FlowGrid& flow, const CameraIntrinsics& intr) {
  DGSF_REQUIRE(flow.height == pc1.height && flow.width == pc1.width, "warp: flow and points differ in shape");
  WarpResult r;
  r.warped = PointImage(pc1.height, pc1.width);
  r.warped.valid = pc1.valid;
  for (size_t i = 0; i < pc1.values.size(); ++i)
    if (pc1.valid[i / 3]) r.warped.values[i] = pc1.values[i] + flow.values[i];
  r.index = warp_index(r.warped, intr);
  return r;
}

namespace {

// slot s -> owning center when the slot is valid, else -1
std::vector<int32_t> owner_rows(const NeighborTable& t) {
  std::vector<int32_t> rep(t.indices.size(), -1);
  for (size_t s = 0; s < rep.size(); ++s)
    if (t.valid[s]) rep[s] = static_cast<int32_t>(s / t.K);
  return rep;
}

template <typename T>
std::vector<Vec3f> row_points(const Matrix<T>& m) {
  std::vector<Vec3f> out(m.rows);
  for (int r = 0; r < m.rows; ++r)
    out[r] = {static_cast<float>(m(r, 0)), static_cast<float>(m(r, 1)), static_cast<float>(m(r, 2))};
  return out;
}

template <typename T>
constexpr T kNormEps = T(1e-12);

}  // namespace

template <typename T>
FlowEmbedding<T> correlate(const PointImage& pc1, Var<T> warped, const WarpIndex& widx, const PointImage& pc2,
                           Var<T> f1, Var<T> f2, const KernelSpec& spec, const KernelSpec& spec2,
                           const CorrelationWeights<T>& w) {
  const int n = pc1.cells();
  DGSF_REQUIRE(warped.rows() == n && warped.cols() == 3, "correlate: warped coordinates not aligned with pc1");
  DGSF_REQUIRE(f1.rows() == n && f2.rows() == pc2.cells(), "correlate: features not aligned with their grids");
  DGSF_REQUIRE(static_cast<int>(widx.uv.size()) == n, "correlate: warp index not aligned with pc1");
  DGSF_REQUIRE(w.att1.out_dim() == 1 && w.att2.out_dim() == 1, "correlate: attention heads must output one score");
  Tape<T>& tape = *warped.tape;
  FlowEmbedding<T> out;
  out.valid = pc1.valid;

  // Stage 1: frame-2 neighbors around the warp index.
  std::vector<uint8_t> active(n);
  std::vector<Pixel> centers(n);
  for (int i = 0; i < n; ++i) {
    active[i] = pc1.valid[i] && widx.in_frame[i];
    centers[i] = active[i] ? widx.uv[i] : Pixel{0, 0};
  }
  const auto queries = row_points(warped.value());
  out.stage1 = group_windows(pc2, queries, active, centers, spec);
  const NeighborTable& t1 = out.stage1;
  const auto rep1 = owner_rows(t1);

  const Var<T> p2 = tape.constant(grid_matrix<T>(pc2));
  const Var<T> dir1 = ops::sub(ops::gather_rows(p2, t1.indices), ops::gather_rows(warped, rep1));
  const Var<T> dist1 = ops::row_norm(dir1, kNormEps<T>);
  const Var<T> f1r = ops::gather_rows(f1, rep1);
  const Var<T> f2n = ops::gather_rows(f2, t1.indices);
  const Var<T> s1 = mlp_forward(w.att1, ops::concat_cols<T>({dir1, dist1, f1r, f2n}));
  auto a1 = ops::group_softmax(s1, t1.K, t1.valid);
  out.attention1 = a1.out;
  const Var<T> e1 = ops::group_weighted_sum(a1.out, mlp_forward(w.val, ops::concat_cols<T>({f2n, dir1})), t1.K);

  out.flagged.assign(n, 0);
  PointImage self = pc1;
  for (int i = 0; i < n; ++i) {
    if (!pc1.valid[i] || !a1.empty[i]) continue;
    out.flagged[i] = 1;
    self.valid[i] = 0;
    self.set(i, {0.0f, 0.0f, 0.0f});
  }

  // Stage 2: re-aggregate over unflagged frame-1 neighbors, original coordinates.
  std::vector<Vec3f> own(n);
  std::vector<Pixel> own_px(n);
  for (int i = 0; i < n; ++i) {
    own[i] = pc1.at(i);
    own_px[i] = pc1.pixel(i);
  }
  out.stage2 = group_windows(self, own, self.valid, own_px, spec2);
  const NeighborTable& t2 = out.stage2;
  const auto rep2 = owner_rows(t2);
  const Var<T> dir2 = tape.constant(relative_coords<T>(self, own, t2));
  const Var<T> dist2 = ops::row_norm(dir2, kNormEps<T>);
  const Var<T> e1n = ops::gather_rows(e1, t2.indices);
  const Var<T> s2 = mlp_forward(w.att2, ops::concat_cols<T>({dir2, dist2, ops::gather_rows(f1, rep2), e1n}));
  auto a2 = ops::group_softmax(s2, t2.K, t2.valid);
  out.attention2 = a2.out;
  out.e = ops::group_weighted_sum(a2.out, e1n, t2.K);
  for (int i = 0; i < n; ++i) out.computed += pc1.valid[i] ? 1 : 0;
  return out;
}

template <typename T>
FlowEmbedding<T> correlate_no_warp(const PointImage& pc1, const PointImage& pc2, Var<T> f1, Var<T> f2,
                                   const KernelSpec& spec, const KernelSpec& spec2, const CorrelationWeights<T>& w) {
  const Var<T> coords = f1.tape->constant(grid_matrix<T>(pc1));
  return correlate(pc1, coords, identity_index(pc1), pc2, f1, f2, spec, spec2, w);
}

template <typename T>
FlowEmbedding<T> correlate_reprojected(const PointImage& pc1, Var<T> warped, const WarpIndex& widx,
                                       const PointImage& pc2, Var<T> f1, Var<T> f2, const KernelSpec& spec,
                                       const KernelSpec& spec2, const CorrelationWeights<T>& w) {
  const int n = pc1.cells();
  DGSF_REQUIRE(warped.rows() == n && static_cast<int>(widx.uv.size()) == n,
               "correlate_reprojected: inputs not aligned with pc1");
  const Matrix<T>& wv = warped.value();

  // Nearest depth wins each target cell; first slot on equal depth.
  std::vector<int32_t> winner(n, -1);
  std::vector<int32_t> target(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!pc1.valid[i] || !widx.in_frame[i]) continue;
    const int t = widx.uv[i].v * pc1.width + widx.uv[i].u;
    target[i] = t;
    if (winner[t] < 0 || wv(i, 2) < wv(winner[t], 2)) winner[t] = i;
  }
  PointImage grid(pc1.height, pc1.width);
  int winners = 0;
  for (int t = 0; t < n; ++t) {
    if (winner[t] < 0) continue;
    ++winners;
    grid.valid[t] = 1;
    const int i = winner[t];
    grid.set(t, {static_cast<float>(wv(i, 0)), static_cast<float>(wv(i, 1)), static_cast<float>(wv(i, 2))});
  }

  FlowEmbedding<T> inner = correlate(grid, ops::gather_rows(warped, winner), identity_index(grid), pc2,
                                     ops::gather_rows(f1, winner), f2, spec, spec2, w);
  FlowEmbedding<T> out;
  out.valid = pc1.valid;
  out.flagged.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (pc1.valid[i] && (target[i] < 0 || inner.flagged[target[i]])) {
      out.flagged[i] = 1;
      target[i] = -1;
    }
  }
  out.e = ops::gather_rows(inner.e, target);
  out.stage1 = std::move(inner.stage1);
  out.stage2 = std::move(inner.stage2);
  out.attention1 = inner.attention1;
  out.attention2 = inner.attention2;
  out.computed = winners;
  for (int i = 0; i < n; ++i) out.copied += (target[i] >= 0 && winner[target[i]] != i) ? 1 : 0;
  return out;
}

template <typename T>
Prediction<T> predict_residual(Var<T> f1, const FlowEmbedding<T>& emb, Var<T> up_emb, const MlpWeights<T>& w_pred,
                               const MlpWeights<T>& w_flow) {
  DGSF_REQUIRE(f1.rows() == emb.e.rows() && up_emb.rows() == f1.rows(), "predict_residual: inputs not aligned");
  DGSF_REQUIRE(w_flow.out_dim() == 3, "predict_residual: flow head must output 3 channels");
  std::vector<uint8_t> live(emb.valid.size());
  for (size_t i = 0; i < live.size(); ++i) live[i] = emb.valid[i] && !emb.flagged[i];
  Prediction<T> p;
  p.refined = ops::mask_rows(mlp_forward(w_pred, ops::concat_cols<T>({f1, emb.e, up_emb})), emb.valid);
  p.residual = ops::mask_rows(mlp_forward(w_flow, p.refined), live);
  return p;
}

template <typename T>
Var<T> refine(Var<T> coarse, Var<T> residual) {
  return ops::add(coarse, residual);
}

FlowGrid refine(const FlowGrid& coarse, const FlowGrid& residual) {
  DGSF_REQUIRE(coarse.height == residual.height && coarse.width == residual.width, "refine: shape mismatch");
  FlowGrid out = coarse;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = coarse.values[i] + residual.values[i];
  return out;
}

#define DGSF_INSTANTIATE_COST_VOLUME(T)                                                                          \
  template FlowEmbedding<T> correlate(const PointImage&, Var<T>, const WarpIndex&, const PointImage&, Var<T>,    \
                                      Var<T>, const KernelSpec&, const KernelSpec&, const CorrelationWeights<T>&); \
  template FlowEmbedding<T> correlate_no_warp(const PointImage&, const PointImage&, Var<T>, Var<T>,              \
                                              const KernelSpec&, const KernelSpec&, const CorrelationWeights<T>&); \
  template FlowEmbedding<T> correlate_reprojected(const PointImage&, Var<T>, const WarpIndex&, const PointImage&, \
                                                  Var<T>, Var<T>, const KernelSpec&, const KernelSpec&,          \
                                                  const CorrelationWeights<T>&);                                 \
  template Prediction<T> predict_residual(Var<T>, const FlowEmbedding<T>&, Var<T>, const MlpWeights<T>&,         \
                                          const MlpWeights<T>&);                                                 \
  template Var<T> refine(Var<T>, Var<T>);

DGSF_INSTANTIATE_COST_VOLUME(float)
DGSF_INSTANTIATE_COST_VOLUME(double)

}  // namespace dgsf
