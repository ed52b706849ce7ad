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

#include <atomic>

#include "dgsf/errors.hpp"
#include "dgsf/simd.hpp"

namespace dgsf::simd {
namespace {

constexpr int kNoOverride = -1;
std::atomic<int> g_override{kNoOverride};

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
  static const bool has = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") != 0;
  }();
  return has;
#else
  return false;
#endif
}

}  // namespace

const char* level_name(Level level) {
  switch (level) {
    case Level::kScalar: return "scalar";
    case Level::kAvx2: return "avx2";
    case Level::kNeon: return "neon";
  }
  return "unknown";
}

bool level_available(Level level) {
  switch (level) {
    case Level::kScalar: return true;
    case Level::kAvx2: return cpu_has_avx2();
    case Level::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Level detected_level() {
  if (level_available(Level::kAvx2)) return Level::kAvx2;
  if (level_available(Level::kNeon)) return Level::kNeon;
  return Level::kScalar;
}

Level active_level() {
  const int o = g_override.load(std::memory_order_relaxed);
  return o == kNoOverride ? detected_level() : static_cast<Level>(o);
}

void set_level_override(std::optional<Level> level) {
  if (!level) {
    g_override.store(kNoOverride);
    return;
  }
  DGSF_REQUIRE(level_available(*level), std::string("SIMD level not available: ") + level_name(*level));
  g_override.store(static_cast<int>(*level));
}

void squared_distances(const float* xs, const float* ys, const float* zs, size_t n, const Vec3f& q, float* out) {
  switch (active_level()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::kAvx2: return avx2::squared_distances(xs, ys, zs, n, q, out);
#endif
#if defined(__aarch64__)
    case Level::kNeon: return neon::squared_distances(xs, ys, zs, n, q, out);
#endif
    default: return scalar::squared_distances(xs, ys, zs, n, q, out);
  }
}

void axpy(size_t n, float a, const float* x, float* y) {
  switch (active_level()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::kAvx2: return avx2::axpy(n, a, x, y);
#endif
#if defined(__aarch64__)
    case Level::kNeon: return neon::axpy(n, a, x, y);
#endif
    default: return scalar::axpy(n, a, x, y);
  }
}

void axpy(size_t n, double a, const double* x, double* y) {
  switch (active_level()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::kAvx2: return avx2::axpy(n, a, x, y);
#endif
#if defined(__aarch64__)
    case Level::kNeon: return neon::axpy(n, a, x, y);
#endif
    default: return scalar::axpy(n, a, x, y);
  }
}

void matmul_acc(size_t m, size_t k, size_t n, const float* a, const float* b, float* c) {
  switch (active_level()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::kAvx2: return avx2::matmul_acc(m, k, n, a, b, c);
#endif
#if defined(__aarch64__)
    case Level::kNeon: return neon::matmul_acc(m, k, n, a, b, c);
#endif
    default: return scalar::matmul_acc(m, k, n, a, b, c);
  }
}

void matmul_acc(size_t m, size_t k, size_t n, const double* a, const double* b, double* c) {
  switch (active_level()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::kAvx2: return avx2::matmul_acc(m, k, n, a, b, c);
#endif
#if defined(__aarch64__)
    case Level::kNeon: return neon::matmul_acc(m, k, n, a, b, c);
#endif
    default: return scalar::matmul_acc(m, k, n, a, b, c);
  }
}

}  // namespace dgsf::simd
