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

// Coarse-to-fine scene flow model: point pyramid for both frames, optional
// image fusion per level, correlation at the coarsest level, then per finer
// level upsample -> warp -> correlate -> predict -> refine.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dgsf/cost_volume.hpp"
#include "dgsf/fusion.hpp"
#include "dgsf/grid.hpp"
#include "dgsf/grouping.hpp"
#include "dgsf/io.hpp"
#include "dgsf/nn.hpp"
#include "dgsf/pyramid.hpp"

namespace dgsf {

enum class WarpMode { kFull, kNoWarp, kReproject };
enum class FusionMode { kOff, kConcat, kAttentive };
enum class GroupingMode { kKernel, kWholeGrid };

struct NetworkConfig {
  int levels = 4;
  std::vector<int> pt_channels{32, 64, 128, 256};
  std::vector<int> img_channels{16, 32, 64, 128};
  std::vector<int> emb_channels{32, 32, 64, 64};
  // Kernel windows and K; the radius comes from max_dist below.
  KernelSpec setconv{7, 9, 16};
  KernelSpec corr_coarse{7, 9, 16};
  KernelSpec corr_fine{3, 3, 9};
  KernelSpec self{5, 5, 9};
  KernelSpec upconv{3, 3, 9};
  float max_dist = 2.5f;  // at full resolution; scaled by the stride of the searched grid
  WarpMode warp = WarpMode::kFull;
  FusionMode fusion = FusionMode::kAttentive;
  GroupingMode grouping = GroupingMode::kKernel;
  std::vector<double> loss_weights{0.1, 0.2, 0.3, 0.8};  // finest first
  double flow2d_weight = 0.0;
  // toy training
  int train_steps = 200;
  double step_size = 2e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;

  void validate() const;
  // `key=value` lines; unknown keys are an input error.
  static NetworkConfig parse(std::string_view text);
  std::string to_text() const;
};

// Maps a CLI mode name (full, no-warp, reproject, no-fusion, concat, no-kbg)
// onto the config.
void apply_mode(NetworkConfig& cfg, std::string_view mode);

template <typename T>
struct LevelWeights {
  MlpWeights<T> setconv;
  MlpWeights<T> fuse_gate;  // attentive only
  MlpWeights<T> fuse_proj;  // attentive only
  MlpWeights<T> fuse_out;   // attentive and concat
  CorrelationWeights<T> corr;
  MlpWeights<T> pred;
  MlpWeights<T> flow;
  MlpWeights<T> up1;  // absent at the coarsest level
  MlpWeights<T> up2;
};

template <typename T>
struct NetworkWeights {
  ImageEncoderWeights<T> image;  // empty without fusion
  std::vector<LevelWeights<T>> levels;

  std::vector<ParamRef<T>> params();
};

template <typename T>
NetworkWeights<T> make_weights(const NetworkConfig& cfg, uint64_t seed);

// Sets every flow head to zero so all predicted flows vanish.
template <typename T>
void zero_flow_heads(NetworkWeights<T>& w);

// Inputs of one frame pair. gt_flow may be empty (0 x 0) for inference.
struct Scene {
  CameraIntrinsics intr;
  PointImage pc1, pc2;
  RgbImage img1, img2;
  FlowGrid gt_flow;
};

template <typename T>
struct ForwardResult {
  std::vector<PointImage> points;    // frame-1 grid per level, finest first
  std::vector<Var<T>> flows;         // per level (cells x 3)
  std::vector<FlowEmbedding<T>> embeddings;
  Var<T> full_flow;                  // full-resolution frame-1 grid
};

template <typename T>
ForwardResult<T> forward(Tape<T>& tape, const Scene& scene, const NetworkWeights<T>& w, const NetworkConfig& cfg);

struct FlowPyramid {
  std::vector<FlowGrid> levels;  // finest first
  FlowGrid full;
  Flow2dGrid flow2d;
};

template <typename T>
FlowPyramid to_pyramid(const ForwardResult<T>& r, const Scene& scene);

// Convenience: forward in float and convert.
FlowPyramid predict(const Scene& scene, const NetworkWeights<float>& w, const NetworkConfig& cfg);

// Ground truth per level by the same strided selection the pyramid uses.
std::vector<FlowGrid> gt_levels(const FlowGrid& gt_full, int levels);

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> level_mean;   // mean endpoint error per level
  std::vector<uint8_t> empty;       // levels with no valid cell
};

// Plain evaluation of the multi-scale loss; validity is the intersection of
// prediction and ground-truth masks.
LossBreakdown multi_scale_loss(const std::vector<FlowGrid>& pred, const std::vector<FlowGrid>& gt,
                               const std::vector<double>& weights);

template <typename T>
struct LossTerms {
  Var<T> total;      // weighted scene-flow loss plus flow2d_weight * flow2d
  Var<T> scene;      // weighted scene-flow loss alone
  Var<T> flow2d;     // mean 2D endpoint error of the induced optical flow
  std::vector<uint8_t> empty;
};

template <typename T>
LossTerms<T> multi_scale_loss(const ForwardResult<T>& r, const Scene& scene, const NetworkConfig& cfg);

struct TrainResult {
  std::vector<double> trace;  // loss before each step plus the final loss
  std::vector<double> flow2d_trace;
  NetworkWeights<float> weights;
};

// Adam or plain descent over the mean loss of `scenes`. A non-finite loss or
// parameter throws InvariantError naming the step.
TrainResult toy_train(const std::vector<Scene>& scenes, const NetworkConfig& cfg, uint64_t seed);
TrainResult toy_train(const std::vector<Scene>& scenes, const NetworkConfig& cfg, NetworkWeights<float> init);

std::string trace_csv(const std::vector<double>& trace);

}  // namespace dgsf
