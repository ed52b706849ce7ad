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

#include "dgsf/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dgsf/simd.hpp"

namespace dgsf::ops {
namespace {

uint64_t hash_bytes(const void* data, size_t n) {
  uint64_t h = 0xcbf29ce484222325ull;
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) h = (h ^ p[i]) * 0x100000001b3ull;
  return h;
}

template <typename V>
uint64_t hash_vector(const std::vector<V>& v) {
  return hash_bytes(v.data(), v.size() * sizeof(V));
}

template <typename T>
void require_same_shape(const Matrix<T>& a, const Matrix<T>& b, const char* op) {
  DGSF_REQUIRE(a.rows == b.rows && a.cols == b.cols, std::string(op) + ": shape mismatch");
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& m) {
  Matrix<T> t(m.cols, m.rows);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) t(c, r) = m(r, c);
  return t;
}

}  // namespace

template <typename T>
Var<T> affine(Var<T> x, Var<T> w, Var<T> b) {
  const Matrix<T>& xv = x.value();
  const Matrix<T>& wv = w.value();
  const Matrix<T>& bv = b.value();
  DGSF_REQUIRE(xv.cols == wv.rows, "affine: input width " + std::to_string(xv.cols) + " does not match weight rows " +
                                       std::to_string(wv.rows));
  DGSF_REQUIRE(bv.rows == 1 && bv.cols == wv.cols, "affine: bias shape mismatch");
  const size_t rows = static_cast<size_t>(xv.rows);
  const size_t cin = static_cast<size_t>(wv.rows);
  const size_t cout = static_cast<size_t>(wv.cols);
  Matrix<T> out(xv.rows, wv.cols);
  for (size_t r = 0; r < rows; ++r) std::copy_n(bv.row(0), cout, out.row(static_cast<int>(r)));
  simd::matmul_acc(rows, cin, cout, xv.data.data(), wv.data.data(), out.data.data());
  return x.tape->record(std::move(out), {x, w, b}, [xi = x.id, wi = w.id, bi = b.id](Tape<T>& t, int self) {
    const Matrix<T>& g = *t.grad_slot(self);
    const Matrix<T>& xv = t.value(xi);
    const Matrix<T>& wv = t.value(wi);
    const size_t rows = static_cast<size_t>(g.rows);
    const size_t cin = static_cast<size_t>(wv.rows);
    const size_t cout = static_cast<size_t>(wv.cols);
    if (Matrix<T>* gx = t.grad_slot(xi))
      simd::matmul_acc(rows, cout, cin, g.data.data(), transpose(wv).data.data(), gx->data.data());
    if (Matrix<T>* gw = t.grad_slot(wi))
      simd::matmul_acc(cin, rows, cout, transpose(xv).data.data(), g.data.data(), gw->data.data());
    if (Matrix<T>* gb = t.grad_slot(bi)) {
      const std::vector<T> ones(rows, T(1));
      simd::matmul_acc(1, rows, cout, ones.data(), g.data.data(), gb->data.data());
    }
  });
}

template <typename T>
Var<T> leaky_relu(Var<T> x, T slope) {
  const Matrix<T>& xv = x.value();
  Matrix<T> out(xv.rows, xv.cols);
  std::vector<uint8_t> sign(xv.size());
  for (size_t i = 0; i < xv.size(); ++i) {
    const T v = xv.data[i];
    sign[i] = v > T(0);
    out.data[i] = sign[i] ? v : slope * v;
  }
  if (x.tape->tracks_branches()) x.tape->mix_branch(hash_vector(sign));
  return x.tape->record(std::move(out), {x}, [xi = x.id, slope](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const Matrix<T>& g = *t.grad_slot(self);
    const Matrix<T>& xv = t.value(xi);
    for (size_t i = 0; i < g.size(); ++i) gx->data[i] += xv.data[i] > T(0) ? g.data[i] : slope * g.data[i];
  });
}

template <typename T>
Var<T> sigmoid(Var<T> x) {
  const Matrix<T>& xv = x.value();
  Matrix<T> out(xv.rows, xv.cols);
  for (size_t i = 0; i < xv.size(); ++i) out.data[i] = T(1) / (T(1) + std::exp(-xv.data[i]));
  return x.tape->record(std::move(out), {x}, [xi = x.id](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const Matrix<T>& g = *t.grad_slot(self);
    const Matrix<T>& s = t.value(self);
    for (size_t i = 0; i < g.size(); ++i) gx->data[i] += g.data[i] * s.data[i] * (T(1) - s.data[i]);
  });
}

template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  DGSF_REQUIRE(!parts.empty(), "concat_cols: no inputs");
  const int rows = parts.front().rows();
  int cols = 0;
  for (const Var<T>& p : parts) {
    DGSF_REQUIRE(p.rows() == rows, "concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix<T> out(rows, cols);
  int offset = 0;
  for (const Var<T>& p : parts) {
    const Matrix<T>& pv = p.value();
    for (int r = 0; r < rows; ++r) std::copy_n(pv.row(r), pv.cols, out.row(r) + offset);
    offset += pv.cols;
  }
  std::vector<int> ids;
  for (const Var<T>& p : parts) ids.push_back(p.id);
  return parts.front().tape->record(std::move(out), parts, [ids](Tape<T>& t, int self) {
    const Matrix<T>& g = *t.grad_slot(self);
    int offset = 0;
    for (int id : ids) {
      const int c = t.value(id).cols;
      if (Matrix<T>* gp = t.grad_slot(id)) {
        for (int r = 0; r < g.rows; ++r) {
          const T* src = g.row(r) + offset;
          T* dst = gp->row(r);
          for (int j = 0; j < c; ++j) dst[j] += src[j];
        }
      }
      offset += c;
    }
  });
}

template <typename T>
Var<T> gather_rows(Var<T> x, std::vector<int32_t> index) {
  const Matrix<T>& xv = x.value();
  Matrix<T> out(static_cast<int>(index.size()), xv.cols);
  if (x.tape->tracks_branches()) x.tape->mix_branch(hash_vector(index));
  for (size_t i = 0; i < index.size(); ++i) {
    const int32_t src = index[i];
    if (src < 0) continue;
    DGSF_REQUIRE(src < xv.rows, "gather_rows: index out of range");
    std::copy_n(xv.row(src), xv.cols, out.row(static_cast<int>(i)));
  }
  return x.tape->record(std::move(out), {x}, [xi = x.id, index = std::move(index)](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const Matrix<T>& g = *t.grad_slot(self);
    for (size_t i = 0; i < index.size(); ++i) {
      if (index[i] < 0) continue;
      const T* src = g.row(static_cast<int>(i));
      T* dst = gx->row(index[i]);
      for (int c = 0; c < g.cols; ++c) dst[c] += src[c];
    }
  });
}

template <typename T>
Var<T> reshape(Var<T> x, int rows, int cols) {
  const Matrix<T>& xv = x.value();
  DGSF_REQUIRE(static_cast<size_t>(rows) * cols == xv.size(), "reshape: size mismatch");
  Matrix<T> out(rows, cols);
  out.data = xv.data;
  return x.tape->record(std::move(out), {x}, [xi = x.id](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const Matrix<T>& g = *t.grad_slot(self);
    for (size_t i = 0; i < g.size(); ++i) gx->data[i] += g.data[i];
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  require_same_shape(a.value(), b.value(), "add");
  Matrix<T> out = a.value();
  const Matrix<T>& bv = b.value();
  for (size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
  return a.tape->record(std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape<T>& t, int self) {
    const Matrix<T>& g = *t.grad_slot(self);
    for (int id : {ai, bi})
      if (Matrix<T>* gp = t.grad_slot(id))
        for (size_t i = 0; i < g.size(); ++i) gp->data[i] += g.data[i];
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  require_same_shape(a.value(), b.value(), "sub");
  Matrix<T> out = a.value();
  const Matrix<T>& bv = b.value();
  for (size_t i = 0; i < out.size(); ++i) out.data[i] -= bv.data[i];
  return a.tape->record(std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape<T>& t, int self) {
    const Matrix<T>& g = *t.grad_slot(self);
    if (Matrix<T>* ga = t.grad_slot(ai))
      for (size_t i = 0; i < g.size(); ++i) ga->data[i] += g.data[i];
    if (Matrix<T>* gb = t.grad_slot(bi))
      for (size_t i = 0; i < g.size(); ++i) gb->data[i] -= g.data[i];
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  require_same_shape(a.value(), b.value(), "mul");
  Matrix<T> out = a.value();
  const Matrix<T>& bv = b.value();
  for (size_t i = 0; i < out.size(); ++i) out.data[i] *= bv.data[i];
  return a.tape->record(std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape<T>& t, int self) {
    const Matrix<T>& g = *t.grad_slot(self);
    const Matrix<T>& av = t.value(ai);
    const Matrix<T>& bv = t.value(bi);
    if (Matrix<T>* ga = t.grad_slot(ai))
      for (size_t i = 0; i < g.size(); ++i) ga->data[i] += g.data[i] * bv.data[i];
    if (Matrix<T>* gb = t.grad_slot(bi))
      for (size_t i = 0; i < g.size(); ++i) gb->data[i] += g.data[i] * av.data[i];
  });
}

template <typename T>
Var<T> mul_rows(Var<T> x, Var<T> s) {
  const Matrix<T>& xv = x.value();
  const Matrix<T>& sv = s.value();
  DGSF_REQUIRE(sv.rows == xv.rows && sv.cols == 1, "mul_rows: scale must be n x 1");
  Matrix<T> out = xv;
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out(r, c) *= sv(r, 0);
  return x.tape->record(std::move(out), {x, s}, [xi = x.id, si = s.id](Tape<T>& t, int self) {
    const Matrix<T>& g = *t.grad_slot(self);
    const Matrix<T>& xv = t.value(xi);
    const Matrix<T>& sv = t.value(si);
    if (Matrix<T>* gx = t.grad_slot(xi))
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) (*gx)(r, c) += g(r, c) * sv(r, 0);
    if (Matrix<T>* gs = t.grad_slot(si))
      for (int r = 0; r < g.rows; ++r) {
        T acc = 0;
        for (int c = 0; c < g.cols; ++c) acc += g(r, c) * xv(r, c);
        (*gs)(r, 0) += acc;
      }
  });
}

template <typename T>
Var<T> scale(Var<T> x, T factor) {
  Matrix<T> out = x.value();
  for (T& v : out.data) v *= factor;
  return x.tape->record(std::move(out), {x}, [xi = x.id, factor](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const Matrix<T>& g = *t.grad_slot(self);
    for (size_t i = 0; i < g.size(); ++i) gx->data[i] += factor * g.data[i];
  });
}

template <typename T>
Var<T> mask_rows(Var<T> x, std::vector<uint8_t> mask) {
  const Matrix<T>& xv = x.value();
  DGSF_REQUIRE(mask.size() == static_cast<size_t>(xv.rows), "mask_rows: mask length mismatch");
  Matrix<T> out(xv.rows, xv.cols);
  if (x.tape->tracks_branches()) x.tape->mix_branch(hash_vector(mask));
  for (int r = 0; r < xv.rows; ++r)
    if (mask[r]) std::copy_n(xv.row(r), xv.cols, out.row(r));
  return x.tape->record(std::move(out), {x}, [xi = x.id, mask = std::move(mask)](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const Matrix<T>& g = *t.grad_slot(self);
    for (int r = 0; r < g.rows; ++r) {
      if (!mask[r]) continue;
      for (int c = 0; c < g.cols; ++c) (*gx)(r, c) += g(r, c);
    }
  });
}

template <typename T>
Var<T> row_norm(Var<T> x, T eps) {
  const Matrix<T>& xv = x.value();
  Matrix<T> out(xv.rows, 1);
  for (int r = 0; r < xv.rows; ++r) {
    T acc = eps;
    for (int c = 0; c < xv.cols; ++c) acc += xv(r, c) * xv(r, c);
    out(r, 0) = std::sqrt(acc);
  }
  return x.tape->record(std::move(out), {x}, [xi = x.id](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const Matrix<T>& g = *t.grad_slot(self);
    const Matrix<T>& y = t.value(self);
    const Matrix<T>& xv = t.value(xi);
    for (int r = 0; r < g.rows; ++r) {
      if (g(r, 0) == T(0) || y(r, 0) == T(0)) continue;  // subgradient 0 at the origin
      const T k = g(r, 0) / y(r, 0);
      for (int c = 0; c < xv.cols; ++c) (*gx)(r, c) += k * xv(r, c);
    }
  });
}

template <typename T>
GroupResult<T> group_max(Var<T> x, int K, const std::vector<uint8_t>& valid) {
  const Matrix<T>& xv = x.value();
  DGSF_REQUIRE(K >= 1 && xv.rows % K == 0, "group_max: rows not a multiple of K");
  DGSF_REQUIRE(valid.size() == static_cast<size_t>(xv.rows), "group_max: validity length mismatch");
  const int n = xv.rows / K;
  const int C = xv.cols;
  Matrix<T> out(n, C);
  std::vector<int32_t> argmax(static_cast<size_t>(n) * C, -1);
  std::vector<uint8_t> empty(n, 0);
  for (int i = 0; i < n; ++i) {
    bool any = false;
    for (int k = 0; k < K; ++k) any = any || valid[i * K + k];
    if (!any) {
      empty[i] = 1;
      continue;
    }
    for (int c = 0; c < C; ++c) {
      int best = -1;
      T top = T(0);
      for (int k = 0; k < K; ++k) {
        const int s = i * K + k;
        if (!valid[s]) continue;
        const T v = xv(s, c);
        if (best < 0 || v > top) {
          best = s;
          top = v;
        }
      }
      out(i, c) = top;
      argmax[static_cast<size_t>(i) * C + c] = best;
    }
  }
  if (x.tape->tracks_branches()) x.tape->mix_branch(hash_vector(argmax) ^ hash_vector(valid));
  Var<T> v = x.tape->record(std::move(out), {x}, [xi = x.id, argmax = std::move(argmax), C](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const Matrix<T>& g = *t.grad_slot(self);
    for (size_t a = 0; a < argmax.size(); ++a) {
      if (argmax[a] < 0) continue;
      const int i = static_cast<int>(a / C);
      const int c = static_cast<int>(a % C);
      (*gx)(argmax[a], c) += g(i, c);
    }
  });
  return {v, std::move(empty)};
}

template <typename T>
GroupResult<T> group_softmax(Var<T> scores, int K, const std::vector<uint8_t>& valid) {
  const Matrix<T>& sv = scores.value();
  DGSF_REQUIRE(sv.cols == 1 && K >= 1 && sv.rows % K == 0, "group_softmax: scores must be (n*K) x 1");
  DGSF_REQUIRE(valid.size() == static_cast<size_t>(sv.rows), "group_softmax: validity length mismatch");
  const int n = sv.rows / K;
  Matrix<T> out(sv.rows, 1);
  std::vector<uint8_t> empty(n, 0);
  if (scores.tape->tracks_branches()) scores.tape->mix_branch(hash_vector(valid));
  for (int i = 0; i < n; ++i) {
    T m = -std::numeric_limits<T>::infinity();
    for (int k = 0; k < K; ++k)
      if (valid[i * K + k]) m = std::max(m, sv(i * K + k, 0));
    if (m == -std::numeric_limits<T>::infinity()) {
      empty[i] = 1;
      continue;
    }
    T total = 0;
    for (int k = 0; k < K; ++k) {
      const int s = i * K + k;
      if (!valid[s]) continue;
      out(s, 0) = std::exp(sv(s, 0) - m);
      total += out(s, 0);
    }
    for (int k = 0; k < K; ++k) out(i * K + k, 0) /= total;
  }
  Var<T> v = scores.tape->record(std::move(out), {scores}, [si = scores.id, K](Tape<T>& t, int self) {
    Matrix<T>* gs = t.grad_slot(si);
    if (!gs) return;
    const Matrix<T>& g = *t.grad_slot(self);
    const Matrix<T>& w = t.value(self);
    for (int i = 0; i < w.rows / K; ++i) {
      T inner = 0;
      for (int k = 0; k < K; ++k) inner += w(i * K + k, 0) * g(i * K + k, 0);
      for (int k = 0; k < K; ++k) {
        const int s = i * K + k;
        (*gs)(s, 0) += w(s, 0) * (g(s, 0) - inner);
      }
    }
  });
  return {v, std::move(empty)};
}

template <typename T>
Var<T> group_weighted_sum(Var<T> weights, Var<T> values, int K) {
  const Matrix<T>& wv = weights.value();
  const Matrix<T>& vv = values.value();
  DGSF_REQUIRE(wv.cols == 1 && wv.rows == vv.rows && K >= 1 && vv.rows % K == 0,
               "group_weighted_sum: shape mismatch");
  const int n = vv.rows / K;
  const size_t C = static_cast<size_t>(vv.cols);
  Matrix<T> out(n, vv.cols);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) {
      const int s = i * K + k;
      if (wv(s, 0) != T(0)) simd::axpy(C, wv(s, 0), vv.row(s), out.row(i));
    }
  return weights.tape->record(std::move(out), {weights, values},
                              [wi = weights.id, vi = values.id, K](Tape<T>& t, int self) {
                                const Matrix<T>& g = *t.grad_slot(self);
                                const Matrix<T>& wv = t.value(wi);
                                const Matrix<T>& vv = t.value(vi);
                                Matrix<T>* gw = t.grad_slot(wi);
                                Matrix<T>* gv = t.grad_slot(vi);
                                for (int s = 0; s < vv.rows; ++s) {
                                  const int i = s / K;
                                  if (gw) {
                                    T acc = 0;
                                    for (int c = 0; c < vv.cols; ++c) acc += g(i, c) * vv(s, c);
                                    (*gw)(s, 0) += acc;
                                  }
                                  if (gv && wv(s, 0) != T(0))
                                    simd::axpy(static_cast<size_t>(vv.cols), wv(s, 0), g.row(i), gv->row(s));
                                }
                              });
}

template <typename T>
Var<T> sum(Var<T> x) {
  T acc = 0;
  for (T v : x.value().data) acc += v;
  Matrix<T> out(1, 1, acc);
  return x.tape->record(std::move(out), {x}, [xi = x.id](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const T g = t.grad_slot(self)->data[0];
    for (T& v : gx->data) v += g;
  });
}

template <typename T>
Var<T> dot_const(Var<T> x, const Matrix<T>& r) {
  require_same_shape(x.value(), r, "dot_const");
  T acc = 0;
  for (size_t i = 0; i < r.size(); ++i) acc += x.value().data[i] * r.data[i];
  return x.tape->record(Matrix<T>(1, 1, acc), {x}, [xi = x.id, r](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const T g = t.grad_slot(self)->data[0];
    for (size_t i = 0; i < r.size(); ++i) gx->data[i] += g * r.data[i];
  });
}

template <typename T>
Var<T> masked_mean(Var<T> x, const std::vector<uint8_t>& mask) {
  const Matrix<T>& xv = x.value();
  DGSF_REQUIRE(xv.cols == 1 && mask.size() == static_cast<size_t>(xv.rows), "masked_mean: shape mismatch");
  if (x.tape->tracks_branches()) x.tape->mix_branch(hash_vector(mask));
  int n = 0;
  T acc = 0;
  for (int r = 0; r < xv.rows; ++r)
    if (mask[r]) {
      acc += xv(r, 0);
      ++n;
    }
  const T inv = n > 0 ? T(1) / static_cast<T>(n) : T(0);
  return x.tape->record(Matrix<T>(1, 1, acc * inv), {x}, [xi = x.id, mask, inv](Tape<T>& t, int self) {
    Matrix<T>* gx = t.grad_slot(xi);
    if (!gx) return;
    const T g = t.grad_slot(self)->data[0] * inv;
    for (size_t r = 0; r < mask.size(); ++r)
      if (mask[r]) gx->data[r] += g;
  });
}

template <typename T>
Var<T> project_flow(const Matrix<T>& points, Var<T> flow, const CameraIntrinsics& intr,
                    const std::vector<uint8_t>& mask) {
  const Matrix<T>& fv = flow.value();
  DGSF_REQUIRE(points.cols == 3 && fv.cols == 3 && points.rows == fv.rows, "project_flow: expected n x 3 inputs");
  DGSF_REQUIRE(mask.size() == static_cast<size_t>(fv.rows), "project_flow: mask length mismatch");
  const T fx = static_cast<T>(intr.fx);
  const T fy = static_cast<T>(intr.fy);
  Matrix<T> out(fv.rows, 2);
  std::vector<uint8_t> live(fv.rows, 0);
  for (int r = 0; r < fv.rows; ++r) {
    const T z = points(r, 2);
    const T wz = z + fv(r, 2);
    if (!mask[r] || !(z > T(0)) || !(wz > T(0))) continue;
    live[r] = 1;
    out(r, 0) = fx * (points(r, 0) + fv(r, 0)) / wz - fx * points(r, 0) / z;
    out(r, 1) = fy * (points(r, 1) + fv(r, 1)) / wz - fy * points(r, 1) / z;
  }
  if (flow.tape->tracks_branches()) flow.tape->mix_branch(hash_vector(live));
  return flow.tape->record(std::move(out), {flow}, [fi = flow.id, points, fx, fy, live](Tape<T>& t, int self) {
    Matrix<T>* gf = t.grad_slot(fi);
    if (!gf) return;
    const Matrix<T>& g = *t.grad_slot(self);
    const Matrix<T>& fv = t.value(fi);
    for (int r = 0; r < fv.rows; ++r) {
      if (!live[r]) continue;
      const T wz = points(r, 2) + fv(r, 2);
      const T wx = points(r, 0) + fv(r, 0);
      const T wy = points(r, 1) + fv(r, 1);
      (*gf)(r, 0) += g(r, 0) * fx / wz;
      (*gf)(r, 1) += g(r, 1) * fy / wz;
      (*gf)(r, 2) += -g(r, 0) * fx * wx / (wz * wz) - g(r, 1) * fy * wy / (wz * wz);
    }
  });
}

#define DGSF_INSTANTIATE_OPS(T)                                                                             \
  template Var<T> affine(Var<T>, Var<T>, Var<T>);                                                           \
  template Var<T> leaky_relu(Var<T>, T);                                                                    \
  template Var<T> sigmoid(Var<T>);                                                                          \
  template Var<T> concat_cols(const std::vector<Var<T>>&);                                                  \
  template Var<T> gather_rows(Var<T>, std::vector<int32_t>);                                                \
  template Var<T> reshape(Var<T>, int, int);                                                                \
  template Var<T> add(Var<T>, Var<T>);                                                                      \
  template Var<T> sub(Var<T>, Var<T>);                                                                      \
  template Var<T> mul(Var<T>, Var<T>);                                                                      \
  template Var<T> mul_rows(Var<T>, Var<T>);                                                                 \
  template Var<T> scale(Var<T>, T);                                                                         \
  template Var<T> mask_rows(Var<T>, std::vector<uint8_t>);                                                  \
  template Var<T> row_norm(Var<T>, T);                                                                      \
  template GroupResult<T> group_max(Var<T>, int, const std::vector<uint8_t>&);                              \
  template GroupResult<T> group_softmax(Var<T>, int, const std::vector<uint8_t>&);                          \
  template Var<T> group_weighted_sum(Var<T>, Var<T>, int);                                                  \
  template Var<T> sum(Var<T>);                                                                              \
  template Var<T> dot_const(Var<T>, const Matrix<T>&);                                                      \
  template Var<T> masked_mean(Var<T>, const std::vector<uint8_t>&);                                         \
  template Var<T> project_flow(const Matrix<T>&, Var<T>, const CameraIntrinsics&, const std::vector<uint8_t>&);

DGSF_INSTANTIATE_OPS(float)
DGSF_INSTANTIATE_OPS(double)

}  // namespace dgsf::ops
