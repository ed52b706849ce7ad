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

#include "dgsf/fusion.hpp"

#include <cmath>

namespace dgsf {

template <typename T>
ImageEncoderWeights<T> make_image_encoder(std::span<const int> channels, std::mt19937_64& rng) {
  ImageEncoderWeights<T> w;
  int in = 3;
  for (int out : channels) {
    const int dims[] = {9 * in, out};
    auto mlp = make_mlp<T>(dims, false, rng);
    w.convs.push_back(std::move(mlp.layers.front()));
    in = out;
  }
  return w;
}

template <typename T>
void collect_params(const std::string& prefix, ImageEncoderWeights<T>& w, std::vector<ParamRef<T>>& out) {
  for (size_t i = 0; i < w.convs.size(); ++i) {
    out.push_back({prefix + ".conv" + std::to_string(i) + ".weight", &w.convs[i].weight});
    out.push_back({prefix + ".conv" + std::to_string(i) + ".bias", &w.convs[i].bias});
  }
}

template <typename T>
Matrix<T> image_matrix(const RgbImage& img) {
  DGSF_REQUIRE(img.rgb.size() == static_cast<size_t>(img.height) * img.width * 3, "image: buffer size mismatch");
  Matrix<T> m(img.height * img.width, 3);
  for (size_t i = 0; i < img.rgb.size(); ++i) m.data[i] = static_cast<T>(img.rgb[i]);
  return m;
}

namespace {

std::vector<int32_t> conv_taps(GridShape in, GridShape out) {
  std::vector<int32_t> idx(static_cast<size_t>(out.height) * out.width * 9, -1);
  size_t s = 0;
  for (int i = 0; i < out.height; ++i)
    for (int j = 0; j < out.width; ++j)
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj, ++s) {
          const int r = 2 * i + 1 + di;
          const int c = 2 * j + 1 + dj;
          if (r >= 0 && c >= 0 && r < in.height && c < in.width) idx[s] = r * in.width + c;
        }
  return idx;
}

}  // namespace

template <typename T>
EncodedImage<T> encode_image(Var<T> rgb, GridShape shape, const ImageEncoderWeights<T>& w) {
  DGSF_REQUIRE(rgb.rows() == shape.height * shape.width && rgb.cols() == 3, "encode_image: rgb must be (H*W) x 3");
  Tape<T>& tape = *rgb.tape;
  EncodedImage<T> out;
  Var<T> x = rgb;
  GridShape in = shape;
  for (const DenseLayer<T>& conv : w.convs) {
    const int cin = x.cols();
    DGSF_REQUIRE(conv.weight.rows == 9 * cin, "encode_image: conv weight does not match input channels");
    const GridShape o{in.height / 2, in.width / 2};
    DGSF_REQUIRE(o.height >= 1 && o.width >= 1, "encode_image: image too small for encoder depth");
    const Var<T> cols = ops::reshape(ops::gather_rows(x, conv_taps(in, o)), o.height * o.width, 9 * cin);
    x = ops::leaky_relu(ops::affine(cols, tape.param(conv.weight), tape.param(conv.bias)), static_cast<T>(kLeakySlope));
    out.levels.push_back(x);
    out.shapes.push_back(o);
    in = o;
  }
  return out;
}

template <typename T>
Var<T> fuse(Var<T> img_f, Var<T> pt_f, const MlpWeights<T>& w_gate, const MlpWeights<T>& w_proj,
            const MlpWeights<T>& w_out, const std::vector<uint8_t>& valid) {
  DGSF_REQUIRE(img_f.rows() == pt_f.rows(), "fuse: image and point grids differ in size");
  DGSF_REQUIRE(w_gate.out_dim() == pt_f.cols() && w_proj.out_dim() == pt_f.cols(),
               "fuse: gate/projection width must equal point channels");
  const Var<T> img = ops::mask_rows(img_f, valid);
  const Var<T> pt = ops::mask_rows(pt_f, valid);
  const Var<T> gate = ops::sigmoid(mlp_forward(w_gate, ops::concat_cols<T>({img, pt})));
  const Var<T> gated = ops::mul(gate, mlp_forward(w_proj, img));
  return ops::mask_rows(mlp_forward(w_out, ops::concat_cols<T>({pt, gated})), valid);
}

template <typename T>
Var<T> fuse_concat(Var<T> img_f, Var<T> pt_f, const MlpWeights<T>& w_out, const std::vector<uint8_t>& valid) {
  DGSF_REQUIRE(img_f.rows() == pt_f.rows(), "fuse_concat: image and point grids differ in size");
  const Var<T> img = ops::mask_rows(img_f, valid);
  const Var<T> pt = ops::mask_rows(pt_f, valid);
  return ops::mask_rows(mlp_forward(w_out, ops::concat_cols<T>({pt, img})), valid);
}

#define DGSF_INSTANTIATE_FUSION(T)                                                                             \
  template ImageEncoderWeights<T> make_image_encoder<T>(std::span<const int>, std::mt19937_64&);               \
  template void collect_params(const std::string&, ImageEncoderWeights<T>&, std::vector<ParamRef<T>>&);        \
  template Matrix<T> image_matrix<T>(const RgbImage&);                                                         \
  template EncodedImage<T> encode_image(Var<T>, GridShape, const ImageEncoderWeights<T>&);                     \
  template Var<T> fuse(Var<T>, Var<T>, const MlpWeights<T>&, const MlpWeights<T>&, const MlpWeights<T>&,       \
                       const std::vector<uint8_t>&);                                                           \
  template Var<T> fuse_concat(Var<T>, Var<T>, const MlpWeights<T>&, const std::vector<uint8_t>&);

DGSF_INSTANTIATE_FUSION(float)
DGSF_INSTANTIATE_FUSION(double)

}  // namespace dgsf
