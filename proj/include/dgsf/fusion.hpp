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

// Pixel-point feature fusion. Image and point grids share H x W, so cell i
// of one corresponds to cell i of the other and fusion is per cell.

#include <cstdint>
#include <vector>

#include "dgsf/io.hpp"
#include "dgsf/nn.hpp"

namespace dgsf {

// 3x3 stride-2 convolutions. Output cell (i, j) is centered on input cell
// (2i+1, 2j+1), the same cell select_centers keeps, with zero padding at the
// far border; each layer halves the grid (floor).
template <typename T>
struct ImageEncoderWeights {
  std::vector<DenseLayer<T>> convs;  // weight is (9*Cin) x Cout, taps row-major

  template <typename U>
  ImageEncoderWeights<U> cast() const {
    ImageEncoderWeights<U> out;
    for (const auto& l : convs) out.convs.push_back({l.weight.template cast<U>(), l.bias.template cast<U>()});
    return out;
  }
};

template <typename T>
ImageEncoderWeights<T> make_image_encoder(std::span<const int> channels, std::mt19937_64& rng);

template <typename T>
void collect_params(const std::string& prefix, ImageEncoderWeights<T>& w, std::vector<ParamRef<T>>& out);

struct GridShape {
  int height = 0;
  int width = 0;
};

// Image as an (H*W x 3) matrix.
template <typename T>
Matrix<T> image_matrix(const RgbImage& img);

template <typename T>
struct EncodedImage {
  std::vector<Var<T>> levels;     // one per conv layer
  std::vector<GridShape> shapes;  // grid of each level
};

template <typename T>
EncodedImage<T> encode_image(Var<T> rgb, GridShape shape, const ImageEncoderWeights<T>& w);

// gate = sigmoid(MLP_gate(img ++ pt)); fused = MLP_out(pt ++ gate * MLP_proj(img)).
// Invalid cells are zero and pass no gradient.
template <typename T>
Var<T> fuse(Var<T> img_f, Var<T> pt_f, const MlpWeights<T>& w_gate, const MlpWeights<T>& w_proj,
            const MlpWeights<T>& w_out, const std::vector<uint8_t>& valid);

// fused = MLP_out(pt ++ img).
template <typename T>
Var<T> fuse_concat(Var<T> img_f, Var<T> pt_f, const MlpWeights<T>& w_out, const std::vector<uint8_t>& valid);

}  // namespace dgsf
