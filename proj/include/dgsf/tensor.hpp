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

#include <cstddef>
#include <span>
#include <vector>

namespace dgsf {

// Dense row-major matrix. Grids of per-cell features are stored as
// (cells x channels) matrices.
template <typename T>
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(int r, int c, T fill = T(0)) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  size_t size() const { return data.size(); }
  T& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  const T& operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  T* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const T* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
  std::span<const T> row_span(int r) const { return {row(r), static_cast<size_t>(cols)}; }

  template <typename U>
  Matrix<U> cast() const {
    Matrix<U> out(rows, cols);
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

}  // namespace dgsf
