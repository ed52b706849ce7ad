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

#include "dgsf/errors.hpp"
#include "dgsf/nn.hpp"
#include "test_util.hpp"

using namespace dgsf;
using dgsf::testing::random_matrix;
using dgsf::testing::uniform;

TEST(Mlp, InitializationBounds) {
  std::mt19937_64 rng(1);
  const int dims[] = {10, 20, 5};
  const auto w = make_mlp<double>(dims, false, rng);
  ASSERT_EQ(w.layers.size(), 2u);
  EXPECT_EQ(w.in_dim(), 10);
  EXPECT_EQ(w.out_dim(), 5);
  const double lim0 = std::sqrt(6.0 / 30.0);
  for (double x : w.layers[0].weight.data) EXPECT_LE(std::abs(x), lim0);
  for (double x : w.layers[0].bias.data) EXPECT_EQ(x, 0.0);
}

TEST(Mlp, TapeAndPlainForwardAgree) {
  std::mt19937_64 rng(2);
  const int dims[] = {3, 8, 4};
  for (bool last : {false, true}) {
    const auto w = make_mlp<double>(dims, last, rng);
    const auto x = random_matrix<double>(rng, 9, 3);
    Tape<double> t;
    EXPECT_EQ(mlp_forward(w, t.constant(x)).value(), mlp_forward(w, x));
  }
}

TEST(Mlp, HandComputedTwoLayer) {
  MlpWeights<double> w;
  w.layers.push_back({Matrix<double>(1, 1, 2.0), Matrix<double>(1, 1, -1.0)});
  w.layers.push_back({Matrix<double>(1, 1, 3.0), Matrix<double>(1, 1, 0.5)});
  Matrix<double> x(2, 1);
  x.data = {1.0, 0.0};
  const auto y = mlp_forward(w, x);
  EXPECT_DOUBLE_EQ(y(0, 0), 3.0 * 1.0 + 0.5);          // h = 1
  EXPECT_DOUBLE_EQ(y(1, 0), 3.0 * (-1.0 * kLeakySlope) + 0.5);  // h = leaky(-1)
}

TEST(Mlp, SelectorCopiesChannels) {
  const auto w = selector_mlp<double>(5, 2, 3);
  std::mt19937_64 rng(3);
  const auto x = random_matrix<double>(rng, 4, 5);
  const auto y = mlp_forward(w, x);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(y(i, 0), x(i, 3));
    EXPECT_EQ(y(i, 1), x(i, 4));
  }
  EXPECT_THROW(selector_mlp<double>(3, 2, 2), InputError);
}

TEST(Mlp, RejectsWrongInputWidth) {
  std::mt19937_64 rng(4);
  const int dims[] = {3, 2};
  const auto w = make_mlp<double>(dims, false, rng);
  Tape<double> t;
  EXPECT_THROW(mlp_forward(w, t.constant(Matrix<double>(2, 4))), InputError);
}

TEST(Optimizer, SgdStep) {
  Matrix<double> p(1, 2);
  p.data = {1.0, -1.0};
  Tape<double> t;
  t.backward(ops::sum(ops::mul(t.param(p), t.param(p))));  // grad 2p
  Optimizer<double> opt(OptimizerKind::kSgd, 0.1);
  opt.step({{"p", &p}}, t);
  EXPECT_DOUBLE_EQ(p.data[0], 0.8);
  EXPECT_DOUBLE_EQ(p.data[1], -0.8);
}

TEST(Optimizer, AdamFirstStepMovesByLearningRate) {
  Matrix<double> p(1, 2);
  p.data = {3.0, -2.0};
  Tape<double> t;
  t.backward(ops::sum(ops::mul(t.param(p), t.param(p))));
  Optimizer<double> opt(OptimizerKind::kAdam, 0.01);
  opt.step({{"p", &p}}, t);
  // Bias-corrected first step is lr * g / (|g| + eps).
  EXPECT_NEAR(p.data[0], 3.0 - 0.01, 1e-9);
  EXPECT_NEAR(p.data[1], -2.0 + 0.01, 1e-9);
}

TEST(Optimizer, UnusedParameterUntouched) {
  Matrix<double> p(1, 1, 5.0), q(1, 1, 7.0);
  Tape<double> t;
  t.backward(ops::sum(t.param(p)));
  Optimizer<double> opt(OptimizerKind::kAdam, 0.1);
  opt.step({{"p", &p}, {"q", &q}}, t);
  EXPECT_EQ(q.data[0], 7.0);
  EXPECT_NE(p.data[0], 5.0);
}

TEST(Weights, RoundTripIsByteStable) {
  std::mt19937_64 rng(5);
  const int dims[] = {3, 4, 2};
  auto w = make_mlp<float>(dims, true, rng);
  std::vector<ParamRef<float>> refs;
  collect_params("m", w, refs);
  ASSERT_EQ(refs.size(), 4u);
  const std::string a = encode_weights(export_params(refs));
  const auto decoded = decode_weights(a);
  EXPECT_EQ(encode_weights(decoded), a);
  EXPECT_EQ(decoded[1].dims, std::vector<uint32_t>{4});  // bias rank 1

  auto w2 = make_mlp<float>(dims, true, rng);
  std::vector<ParamRef<float>> refs2;
  collect_params("m", w2, refs2);
  import_params(decoded, refs2);
  for (size_t i = 0; i < refs.size(); ++i) EXPECT_EQ(*refs[i].value, *refs2[i].value);
}

TEST(Weights, ImportRejectsMismatch) {
  std::mt19937_64 rng(6);
  const int dims[] = {3, 4};
  const int other[] = {3, 5};
  auto w = make_mlp<float>(dims, false, rng);
  auto v = make_mlp<float>(other, false, rng);
  std::vector<ParamRef<float>> a, b;
  collect_params("m", w, a);
  collect_params("m", v, b);
  EXPECT_THROW(import_params(export_params(a), b), InputError);
  std::string bytes = encode_weights(export_params(a));
  EXPECT_THROW(decode_weights(bytes.substr(0, bytes.size() - 2)), InputError);
}

TEST(GradCheckTool, NonFiniteThrows) {
  Matrix<double> x(1, 1, -1.0);
  EXPECT_THROW(grad_check([&](Tape<double>& t) { return ops::sum(ops::row_norm(t.param(x), -10.0)); }, {&x}),
               InvariantError);
}

TEST(GradCheckTool, ZeroSlopeIsUnresolvedNotFailed) {
  // Softmax is invariant to a common shift, so the shared offset has zero slope.
  Matrix<double> s(4, 1), shift(1, 1, 0.3);
  s.data = {0.5, -1.0, 2.0, 0.25};
  Matrix<double> v(4, 2);
  v.data = {1, 2, 3, 4, 5, 6, 7, 8};
  const auto f = [&](Tape<double>& t) {
    const auto ones = t.constant(Matrix<double>(4, 1, 1.0));
    const auto scores = ops::add(t.param(s), ops::affine(ones, t.param(shift), t.constant(Matrix<double>(1, 1))));
    const auto w = ops::group_softmax(scores, 4, std::vector<uint8_t>(4, 1)).out;
    return ops::sum(ops::group_weighted_sum(w, t.constant(v), 4));
  };
  const auto res = grad_check(f, {&s, &shift});
  EXPECT_LE(res.max_rel_error, 1e-4);
  EXPECT_EQ(res.checked + res.unresolved, 5u);
  EXPECT_LE(res.unresolved, 1u);
}
