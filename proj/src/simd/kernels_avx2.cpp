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

// Compiled with -mavx2. Only called after a CPUID check.

#include <immintrin.h>

#include "dgsf/simd.hpp"

namespace dgsf::simd::avx2 {

void squared_distances(const float* xs, const float* ys, const float* zs, size_t n, const Vec3f& q, float* out) {
  const __m256 qx = _mm256_set1_ps(q[0]);
  const __m256 qy = _mm256_set1_ps(q[1]);
  const __m256 qz = _mm256_set1_ps(q[2]);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 dx = _mm256_sub_ps(_mm256_loadu_ps(xs + i), qx);
    const __m256 dy = _mm256_sub_ps(_mm256_loadu_ps(ys + i), qy);
    const __m256 dz = _mm256_sub_ps(_mm256_loadu_ps(zs + i), qz);
    const __m256 xy = _mm256_add_ps(_mm256_mul_ps(dx, dx), _mm256_mul_ps(dy, dy));
    _mm256_storeu_ps(out + i, _mm256_add_ps(xy, _mm256_mul_ps(dz, dz)));
  }
  scalar::squared_distances(xs + i, ys + i, zs + i, n - i, q, out + i);
}

void axpy(size_t n, float a, const float* x, float* y) {
  const __m256 va = _mm256_set1_ps(a);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(x + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpy(size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
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

}  // namespace dgsf::simd::avx2
