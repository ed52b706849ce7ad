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

#include <arm_neon.h>

#include "dgsf/simd.hpp"

namespace dgsf::simd::neon {

void squared_distances(const float* xs, const float* ys, const float* zs, size_t n, const Vec3f& q, float* out) {
  const float32x4_t qx = vdupq_n_f32(q[0]);
  const float32x4_t qy = vdupq_n_f32(q[1]);
  const float32x4_t qz = vdupq_n_f32(q[2]);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t dx = vsubq_f32(vld1q_f32(xs + i), qx);
    const float32x4_t dy = vsubq_f32(vld1q_f32(ys + i), qy);
    const float32x4_t dz = vsubq_f32(vld1q_f32(zs + i), qz);
    // vmulq + vaddq, not vmlaq/vfmaq: the latter may fuse and break bit-equality.
    const float32x4_t xy = vaddq_f32(vmulq_f32(dx, dx), vmulq_f32(dy, dy));
    vst1q_f32(out + i, vaddq_f32(xy, vmulq_f32(dz, dz)));
  }
  scalar::squared_distances(xs + i, ys + i, zs + i, n - i, q, out + i);
}

void axpy(size_t n, float a, const float* x, float* y) {
  const float32x4_t va = vdupq_n_f32(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vaddq_f32(vld1q_f32(y + i), vmulq_f32(va, vld1q_f32(x + i))));
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpy(size_t n, double a, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
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

}  // namespace dgsf::simd::neon
