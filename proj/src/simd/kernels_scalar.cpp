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

#include "dgsf/simd.hpp"

namespace dgsf::simd::scalar {

void squared_distances(const float* xs, const float* ys, const float* zs, size_t n, const Vec3f& q, float* out) {
  for (size_t i = 0; i < n; ++i) {
    const float dx = xs[i] - q[0];
    const float dy = ys[i] - q[1];
    const float dz = zs[i] - q[2];
    out[i] = (dx * dx + dy * dy) + dz * dz;
  }
}

void axpy(size_t n, float a, const float* x, float* y) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy(size_t n, double a, const double* x, double* y) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

namespace {

template <typename T>
void matmul_acc_impl(size_t m, size_t k, size_t n, const T* a, const T* b, T* c) {
  for (size_t i = 0; i < m; ++i) {
    const T* ar = a + i * k;
    T* cr = c + i * n;
    for (size_t j = 0; j < k; ++j)
      if (ar[j] != T(0)) axpy(n, ar[j], b + j * n, cr);
  }
}

}  // namespace

void matmul_acc(size_t m, size_t k, size_t n, const float* a, const float* b, float* c) {
  matmul_acc_impl(m, k, n, a, b, c);
}

void matmul_acc(size_t m, size_t k, size_t n, const double* a, const double* b, double* c) {
  matmul_acc_impl(m, k, n, a, b, c);
}

}  // namespace dgsf::simd::scalar
