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

#include "dgsf/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dgsf/io.hpp"

namespace dgsf {

template <typename T>
void MlpWeights<T>::validate() const {
  DGSF_REQUIRE(!layers.empty(), "mlp: no layers");
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    DGSF_REQUIRE(l.bias.rows == 1 && l.bias.cols == l.weight.cols, "mlp: bias shape mismatch");
    if (i > 0) DGSF_REQUIRE(layers[i - 1].weight.cols == l.weight.rows, "mlp: layer widths do not chain");
    for (T v : l.weight.data) DGSF_REQUIRE(std::isfinite(static_cast<double>(v)), "mlp: non-finite weight");
    for (T v : l.bias.data) DGSF_REQUIRE(std::isfinite(static_cast<double>(v)), "mlp: non-finite bias");
  }
}

template <typename T>
MlpWeights<T> make_mlp(std::span<const int> dims, bool activate_last, std::mt19937_64& rng) {
  DGSF_REQUIRE(dims.size() >= 2, "make_mlp: need at least input and output width");
  MlpWeights<T> w;
  w.activate_last = activate_last;
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    const int in = dims[i];
    const int out = dims[i + 1];
    DGSF_REQUIRE(in >= 1 && out >= 1, "make_mlp: widths must be positive");
    const double bound = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer<T> layer{Matrix<T>(in, out), Matrix<T>(1, out)};
    for (T& v : layer.weight.data) v = static_cast<T>(dist(rng));
    w.layers.push_back(std::move(layer));
  }
  return w;
}

template <typename T>
MlpWeights<T> selector_mlp(int in, int out, int offset) {
  DGSF_REQUIRE(offset >= 0 && offset + out <= in, "selector_mlp: channel range outside input");
  MlpWeights<T> w;
  DenseLayer<T> layer{Matrix<T>(in, out), Matrix<T>(1, out)};
  for (int c = 0; c < out; ++c) layer.weight(offset + c, c) = T(1);
  w.layers.push_back(std::move(layer));
  return w;
}

template <typename T>
Var<T> mlp_forward(const MlpWeights<T>& w, Var<T> x) {
  DGSF_REQUIRE(!w.layers.empty(), "mlp_forward: no layers");
  DGSF_REQUIRE(x.cols() == w.in_dim(), "mlp_forward: input has " + std::to_string(x.cols()) +
                                           " channels, weights expect " + std::to_string(w.in_dim()));
  Tape<T>& tape = *x.tape;
  Var<T> h = x;
  for (size_t i = 0; i < w.layers.size(); ++i) {
    h = ops::affine(h, tape.param(w.layers[i].weight), tape.param(w.layers[i].bias));
    if (i + 1 < w.layers.size() || w.activate_last) h = ops::leaky_relu(h, static_cast<T>(kLeakySlope));
  }
  return h;
}

template <typename T>
Matrix<T> mlp_forward(const MlpWeights<T>& w, const Matrix<T>& x) {
  Tape<T> tape;
  return mlp_forward(w, tape.constant(x)).value();
}

GradCheckResult grad_check(const ScalarFn& f, const std::vector<Matrix<double>*>& inputs,
                           const GradCheckOptions& opts) {
  DGSF_REQUIRE(opts.eps > 0.0, "grad_check: eps must be positive");
  auto evaluate = [&](uint64_t& signature) {
    Tape<double> t;
    t.track_branches(true);
    const Var<double> out = f(t);
    DGSF_REQUIRE(out.rows() == 1 && out.cols() == 1, "grad_check: function must return a scalar");
    signature = t.branch_signature();
    return out.value().data[0];
  };

  std::vector<Matrix<double>> analytic;
  uint64_t base_signature = 0;
  {
    Tape<double> tape;
    tape.track_branches(true);
    const Var<double> out = f(tape);
    DGSF_REQUIRE(out.rows() == 1 && out.cols() == 1, "grad_check: function must return a scalar");
    base_signature = tape.branch_signature();
    tape.backward(out);
    for (Matrix<double>* in : inputs) {
      const Matrix<double>* g = tape.param_grad(*in);
      analytic.push_back(g ? *g : Matrix<double>(in->rows, in->cols));
    }
  }

  GradCheckResult res;
  std::mt19937_64 rng(opts.seed);
  for (size_t i = 0; i < inputs.size(); ++i) {
    Matrix<double>& x = *inputs[i];
    std::vector<size_t> coords(x.size());
    std::iota(coords.begin(), coords.end(), size_t{0});
    if (opts.max_coords_per_input > 0 && coords.size() > opts.max_coords_per_input) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opts.max_coords_per_input);
      std::sort(coords.begin(), coords.end());
    }
    for (size_t j : coords) {
      const double original = x.data[j];
      uint64_t sig_plus = 0, sig_minus = 0;
      x.data[j] = original + opts.eps;
      const double f_plus = evaluate(sig_plus);
      x.data[j] = original - opts.eps;
      const double f_minus = evaluate(sig_minus);
      x.data[j] = original;
      const double a = analytic[i].data[j];
      const double n = (f_plus - f_minus) / (2.0 * opts.eps);
      if (!std::isfinite(a) || !std::isfinite(n)) {
        std::ostringstream os;
        os << "grad_check: non-finite value at input " << i << " coordinate " << j << " (analytic " << a
           << ", numeric " << n << ")";
        throw InvariantError(os.str());
      }
      if (sig_plus != base_signature || sig_minus != base_signature) {
        ++res.skipped;
        continue;
      }
      // Central differences cannot resolve slopes below a few ulps of f over 2*eps.
      const double floor = 8.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(f_plus), std::abs(f_minus)) / (2.0 * opts.eps);
      if (std::abs(a) <= floor && std::abs(n) <= floor) {
        ++res.unresolved;
        continue;
      }
      const double err = std::max(0.0, std::abs(a - n) - floor) / std::max(1e-8, std::abs(a) + std::abs(n));
      ++res.checked;
      if (err >= res.max_rel_error) {
        res.max_rel_error = err;
        res.worst_input = i;
        res.worst_index = j;
        res.worst_analytic = a;
        res.worst_numeric = n;
      }
    }
  }
  return res;
}

template <typename T>
void collect_params(const std::string& prefix, MlpWeights<T>& w, std::vector<ParamRef<T>>& out) {
  for (size_t i = 0; i < w.layers.size(); ++i) {
    out.push_back({prefix + ".L" + std::to_string(i) + ".weight", &w.layers[i].weight});
    out.push_back({prefix + ".L" + std::to_string(i) + ".bias", &w.layers[i].bias});
  }
}

template <typename T>
void Optimizer<T>::step(const std::vector<ParamRef<T>>& params, const Tape<T>& tape) {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (const ParamRef<T>& p : params) {
    const Matrix<T>* g = tape.param_grad(*p.value);
    if (!g) continue;
    if (kind_ == OptimizerKind::kSgd) {
      for (size_t i = 0; i < g->size(); ++i) p.value->data[i] -= static_cast<T>(lr_ * g->data[i]);
      continue;
    }
    Moments& mom = moments_[p.name];
    if (mom.m.empty()) {
      mom.m.assign(g->size(), 0.0);
      mom.v.assign(g->size(), 0.0);
    }
    for (size_t i = 0; i < g->size(); ++i) {
      const double gi = g->data[i];
      mom.m[i] = beta1_ * mom.m[i] + (1.0 - beta1_) * gi;
      mom.v[i] = beta2_ * mom.v[i] + (1.0 - beta2_) * gi * gi;
      const double mhat = mom.m[i] / bc1;
      const double vhat = mom.v[i] / bc2;
      p.value->data[i] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

std::string encode_weights(const std::vector<NamedTensor>& tensors) {
  io::ByteWriter w;
  w.bytes(io::kWeightsMagic);
  w.u32(static_cast<uint32_t>(tensors.size()));
  for (const NamedTensor& t : tensors) {
    size_t expected = 1;
    for (uint32_t d : t.dims) expected *= d;
    DGSF_REQUIRE(expected == t.data.size(), "encode_weights: '" + t.name + "' data does not match dims");
    w.u32(static_cast<uint32_t>(t.name.size()));
    w.bytes(t.name);
    w.u32(static_cast<uint32_t>(t.dims.size()));
    for (uint32_t d : t.dims) w.u32(d);
  }
  for (const NamedTensor& t : tensors)
    for (float v : t.data) w.f32(v);
  return w.data();
}

std::vector<NamedTensor> decode_weights(std::string_view bytes) {
  io::ByteReader r(bytes, "weights file");
  r.expect_magic(io::kWeightsMagic);
  const uint32_t count = r.u32();
  std::vector<NamedTensor> out;
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const uint32_t len = r.u32();
    t.name = std::string(r.take(len));
    const uint32_t rank = r.u32();
    if (rank > 8) throw InputError("weights file: implausible rank for '" + t.name + "'");
    uint64_t n = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      t.dims.push_back(r.u32());
      n *= t.dims.back();
    }
    if (n > r.remaining()) throw InputError("weights file: tensor '" + t.name + "' larger than file");
    t.data.resize(n);
    out.push_back(std::move(t));
  }
  for (NamedTensor& t : out)
    for (float& v : t.data) v = r.f32();
  r.expect_end();
  return out;
}

template <typename T>
std::vector<NamedTensor> export_params(const std::vector<ParamRef<T>>& params) {
  std::vector<NamedTensor> out;
  for (const ParamRef<T>& p : params) {
    NamedTensor t;
    t.name = p.name;
    const bool is_bias = p.name.size() >= 5 && p.name.ends_with(".bias");
    if (is_bias)
      t.dims = {static_cast<uint32_t>(p.value->cols)};
    else
      t.dims = {static_cast<uint32_t>(p.value->rows), static_cast<uint32_t>(p.value->cols)};
    for (T v : p.value->data) t.data.push_back(static_cast<float>(v));
    out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
void import_params(const std::vector<NamedTensor>& tensors, const std::vector<ParamRef<T>>& params) {
  std::map<std::string, const NamedTensor*> by_name;
  for (const NamedTensor& t : tensors) {
    DGSF_REQUIRE(!by_name.count(t.name), "weights: duplicate tensor '" + t.name + "'");
    by_name[t.name] = &t;
  }
  DGSF_REQUIRE(by_name.size() == params.size(), "weights: manifest has " + std::to_string(by_name.size()) +
                                                    " tensors, configuration needs " + std::to_string(params.size()));
  for (const ParamRef<T>& p : params) {
    auto it = by_name.find(p.name);
    DGSF_REQUIRE(it != by_name.end(), "weights: missing tensor '" + p.name + "'");
    const NamedTensor& t = *it->second;
    DGSF_REQUIRE(t.data.size() == p.value->size(), "weights: tensor '" + p.name + "' has the wrong size");
    const bool is_bias = p.name.ends_with(".bias");
    const bool shape_ok = is_bias ? (t.dims.size() == 1 && static_cast<int>(t.dims[0]) == p.value->cols)
                                  : (t.dims.size() == 2 && static_cast<int>(t.dims[0]) == p.value->rows &&
                                     static_cast<int>(t.dims[1]) == p.value->cols);
    DGSF_REQUIRE(shape_ok, "weights: tensor '" + p.name + "' has the wrong shape");
    for (size_t i = 0; i < t.data.size(); ++i) p.value->data[i] = static_cast<T>(t.data[i]);
  }
}

#define DGSF_INSTANTIATE_NN(T)                                                                  \
  template struct MlpWeights<T>;                                                               \
  template MlpWeights<T> make_mlp<T>(std::span<const int>, bool, std::mt19937_64&);            \
  template MlpWeights<T> selector_mlp<T>(int, int, int);                                       \
  template Var<T> mlp_forward(const MlpWeights<T>&, Var<T>);                                   \
  template Matrix<T> mlp_forward(const MlpWeights<T>&, const Matrix<T>&);                      \
  template void collect_params(const std::string&, MlpWeights<T>&, std::vector<ParamRef<T>>&); \
  template class Optimizer<T>;                                                                 \
  template std::vector<NamedTensor> export_params(const std::vector<ParamRef<T>>&);            \
  template void import_params(const std::vector<NamedTensor>&, const std::vector<ParamRef<T>>&);

DGSF_INSTANTIATE_NN(float)
DGSF_INSTANTIATE_NN(double)

}  // namespace dgsf
