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

#include <cmath>

#include "dgsf/fusion.hpp"
#include "test_util.hpp"

using namespace dgsf;
using dgsf::testing::random_matrix;
using dgsf::testing::uniform;
using M = Matrix<double>;

namespace {

double leaky(double x) { return x > 0 ? x : kLeakySlope * x; }

std::vector<uint8_t> random_mask(std::mt19937_64& rng, int n) {
  std::vector<uint8_t> m(n);
  for (auto& b : m) b = uniform(rng, 0, 1) < 0.7 ? 1 : 0;
  return m;
}

M cat(const M& a, const M& b, int r) {
  M x(1, a.cols + b.cols);
  for (int c = 0; c < a.cols; ++c) x(0, c) = a(r, c);
  for (int c = 0; c < b.cols; ++c) x(0, a.cols + c) = b(r, c);
  return x;
}

}  // namespace

TEST(Fusion, EncoderMatchesDirectConvolution) {
  std::mt19937_64 rng(1);
  const int H = 9, W = 12;
  const M rgb = random_matrix<double>(rng, H * W, 3, 0, 1);
  const int ch[] = {4, 5};
  const auto w = make_image_encoder<double>(ch, rng);
  Tape<double> t;
  const auto enc = encode_image(t.constant(rgb), {H, W}, w);
  ASSERT_EQ(enc.levels.size(), 2u);
  EXPECT_EQ(enc.shapes[0].height, 4);
  EXPECT_EQ(enc.shapes[0].width, 6);
  EXPECT_EQ(enc.shapes[1].height, 2);
  EXPECT_EQ(enc.shapes[1].width, 3);
  // First layer by direct summation over the 3x3 neighborhood of (2i+1, 2j+1).
  const M& out = enc.levels[0].value();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 6; ++j)
      for (int o = 0; o < 4; ++o) {
        double s = w.convs[0].bias(0, o);
        for (int di = -1; di <= 1; ++di)
          for (int dj = -1; dj <= 1; ++dj) {
            const int r = 2 * i + 1 + di, c = 2 * j + 1 + dj;
            if (r < 0 || c < 0 || r >= H || c >= W) continue;
            const int tap = (di + 1) * 3 + (dj + 1);
            for (int ci = 0; ci < 3; ++ci) s += rgb(r * W + c, ci) * w.convs[0].weight(tap * 3 + ci, o);
          }
        EXPECT_NEAR(out(i * 6 + j, o), leaky(s), 1e-12);
      }
}

TEST(Fusion, EncoderRejectsTinyImage) {
  std::mt19937_64 rng(2);
  const int ch[] = {4, 4, 4};
  const auto w = make_image_encoder<double>(ch, rng);
  Tape<double> t;
  EXPECT_THROW(encode_image(t.constant(M(4 * 4, 3)), {4, 4}, w), InputError);
}

TEST(Fusion, AttentiveMatchesFormulaAndMasks) {
  std::mt19937_64 rng(3);
  const int n = 10, I = 3, C = 4;
  const M img = random_matrix<double>(rng, n, I), pt = random_matrix<double>(rng, n, C);
  const auto valid = random_mask(rng, n);
  const int dg[] = {I + C, C}, dp[] = {I, C}, dout[] = {2 * C, C};
  const auto wg = make_mlp<double>(dg, false, rng), wp = make_mlp<double>(dp, false, rng),
             wo = make_mlp<double>(dout, true, rng);
  Tape<double> t;
  const M out = fuse(t.constant(img), t.constant(pt), wg, wp, wo, valid).value();
  for (int r = 0; r < n; ++r) {
    if (!valid[r]) {
      for (int c = 0; c < C; ++c) EXPECT_EQ(out(r, c), 0.0);
      continue;
    }
    const M g = mlp_forward(wg, cat(img, pt, r));
    const M p = mlp_forward(wp, cat(img, M(n, 0), r));
    M x(1, 2 * C);
    for (int c = 0; c < C; ++c) {
      x(0, c) = pt(r, c);
      x(0, C + c) = p(0, c) / (1.0 + std::exp(-g(0, c)));
    }
    const M want = mlp_forward(wo, x);
    for (int c = 0; c < C; ++c) EXPECT_NEAR(out(r, c), want(0, c), 1e-12);
  }
}

TEST(Fusion, ClosedGateIgnoresImage) {
  // A strongly negative gate bias shuts the image branch.
  std::mt19937_64 rng(4);
  const int n = 5, I = 3, C = 2;
  const M pt = random_matrix<double>(rng, n, C);
  const int dg[] = {I + C, C}, dp[] = {I, C}, dout[] = {2 * C, C};
  auto wg = make_mlp<double>(dg, false, rng);
  for (auto& b : wg.layers[0].bias.data) b = -80.0;
  const auto wp = make_mlp<double>(dp, false, rng), wo = make_mlp<double>(dout, false, rng);
  const std::vector<uint8_t> valid(n, 1);
  Tape<double> t;
  const M a = fuse(t.constant(random_matrix<double>(rng, n, I)), t.constant(pt), wg, wp, wo, valid).value();
  const M b = fuse(t.constant(random_matrix<double>(rng, n, I)), t.constant(pt), wg, wp, wo, valid).value();
  for (size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(a.data[i], b.data[i], 1e-12);
}

TEST(Fusion, ConcatMatchesFormula) {
  std::mt19937_64 rng(5);
  const int n = 6, I = 2, C = 3;
  const M img = random_matrix<double>(rng, n, I), pt = random_matrix<double>(rng, n, C);
  const auto valid = random_mask(rng, n);
  const int d[] = {C + I, C};
  const auto w = make_mlp<double>(d, true, rng);
  Tape<double> t;
  const M out = fuse_concat(t.constant(img), t.constant(pt), w, valid).value();
  for (int r = 0; r < n; ++r) {
    const M want = valid[r] ? mlp_forward(w, cat(pt, img, r)) : M(1, C);
    for (int c = 0; c < C; ++c) EXPECT_NEAR(out(r, c), want(0, c), 1e-12);
  }
}

TEST(Fusion, GradCheckEncoderAndFusion) {
  for (int s = 0; s < 20; ++s) {
    std::mt19937_64 rng(100 + s);
    const int H = 6, W = 8, C = 3;
    M rgb = random_matrix<double>(rng, H * W, 3, 0, 1);
    const int ch[] = {4};
    auto enc = make_image_encoder<double>(ch, rng);
    for (auto& b : enc.convs[0].bias.data) b = uniform(rng, -0.2, 0.2);
    M pt = random_matrix<double>(rng, 12, C);
    const auto valid = random_mask(rng, 12);
    const int dg[] = {4 + C, C}, dp[] = {4, C}, dout[] = {2 * C, C};
    auto wg = make_mlp<double>(dg, false, rng), wp = make_mlp<double>(dp, false, rng),
         wo = make_mlp<double>(dout, true, rng);
    const M r = random_matrix<double>(rng, 12, C);
    const auto f = [&](Tape<double>& t) {
      const auto e = encode_image(t.param(rgb), {H, W}, enc);
      return ops::dot_const(fuse(e.levels[0], t.param(pt), wg, wp, wo, valid), r);
    };
    const auto res = grad_check(f, {&rgb, &pt, &enc.convs[0].weight, &enc.convs[0].bias, &wg.layers[0].weight,
                                    &wp.layers[0].weight, &wo.layers[0].weight});
    EXPECT_LE(res.max_rel_error, 1e-4) << "seed " << s;
  }
}
