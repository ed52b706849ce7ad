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

// Data-parallel inner loops with a scalar reference and SIMD variants chosen
// at runtime. Every variant evaluates the same expression tree with separate
// multiplies and adds (no FMA), so results are bit-identical across levels.

#include <cstddef>
#include <optional>

#include "dgsf/grid.hpp"

namespace dgsf::simd {

enum class Level { kScalar, kAvx2, kNeon };

const char* level_name(Level level);

// Best level supported by both the build and the running CPU.
Level detected_level();

// Level used by the dispatching entry points below.
Level active_level();

// Forces a level (e.g. for equivalence tests). std::nullopt restores
// detection. Throws InputError if the level is unavailable here.
void set_level_override(std::optional<Level> level);

bool level_available(Level level);

// out[i] = ((xs[i]-q.x)^2 + (ys[i]-q.y)^2) + (zs[i]-q.z)^2
void squared_distances(const float* xs, const float* ys, const float* zs, size_t n, const Vec3f& q, float* out);

// y[i] += a * x[i]
void axpy(size_t n, float a, const float* x, float* y);
void axpy(size_t n, double a, const double* x, double* y);

// c (m x n) += a (m x k) * b (k x n), all row-major. Each output row is
// accumulated over k in order, one axpy per nonzero a(i, j), so results match
// a loop of axpy calls bit for bit.
void matmul_acc(size_t m, size_t k, size_t n, const float* a, const float* b, float* c);
void matmul_acc(size_t m, size_t k, size_t n, const double* a, const double* b, double* c);

// Per-level implementations, exposed for the equivalence tests.
namespace scalar {
void squared_distances(const float* xs, const float* ys, const float* zs, size_t n, const Vec3f& q, float* out);
void axpy(size_t n, float a, const float* x, float* y);
void axpy(size_t n, double a, const double* x, double* y);
void matmul_acc(size_t m, size_t k, size_t n, const float* a, const float* b, float* c);
void matmul_acc(size_t m, size_t k, size_t n, const double* a, const double* b, double* c);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void squared_distances(const float* xs, const float* ys, const float* zs, size_t n, const Vec3f& q, float* out);
void axpy(size_t n, float a, const float* x, float* y);
void axpy(size_t n, double a, const double* x, double* y);
void matmul_acc(size_t m, size_t k, size_t n, const float* a, const float* b, float* c);
void matmul_acc(size_t m, size_t k, size_t n, const double* a, const double* b, double* c);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void squared_distances(const float* xs, const float* ys, const float* zs, size_t n, const Vec3f& q, float* out);
void axpy(size_t n, float a, const float* x, float* y);
void axpy(size_t n, double a, const double* x, double* y);
void matmul_acc(size_t m, size_t k, size_t n, const float* a, const float* b, float* c);
void matmul_acc(size_t m, size_t k, size_t n, const double* a, const double* b, double* c);
}  // namespace neon
#endif

}  // namespace dgsf::simd
