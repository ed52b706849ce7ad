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

#include "dgsf/network.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace dgsf {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw InputError("config: " + key + " expects an integer, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw InputError("config: " + key + " expects a number, got '" + v + "'");
}

std::vector<int> parse_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(parse_int(key, s));
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_double(key, s));
  return out;
}

// "7x9" -> rows 7, cols 9
void parse_window(const std::string& key, const std::string& v, KernelSpec& spec) {
  const auto x = v.find('x');
  if (x == std::string::npos) throw InputError("config: " + key + " expects HxW, got '" + v + "'");
  spec.k_h = parse_int(key, v.substr(0, x));
  spec.k_w = parse_int(key, v.substr(x + 1));
}

template <typename V>
std::string join(const std::vector<V>& xs) {
  std::ostringstream os;
  for (size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
  return os.str();
}

const char* warp_name(WarpMode m) {
  switch (m) {
    case WarpMode::kFull: return "full";
    case WarpMode::kNoWarp: return "nowarp";
    case WarpMode::kReproject: return "reproject";
  }
  return "?";
}

const char* fusion_name(FusionMode m) {
  switch (m) {
    case FusionMode::kOff: return "off";
    case FusionMode::kConcat: return "concat";
    case FusionMode::kAttentive: return "attentive";
  }
  return "?";
}

}  // namespace

void NetworkConfig::validate() const {
  DGSF_REQUIRE(levels >= 1, "config: levels must be >= 1");
  const size_t L = static_cast<size_t>(levels);
  DGSF_REQUIRE(pt_channels.size() == L && img_channels.size() == L && emb_channels.size() == L,
               "config: channel lists must have one entry per level");
  DGSF_REQUIRE(loss_weights.size() == L, "config: loss_weights must have one entry per level");
  for (size_t l = 0; l < L; ++l) {
    DGSF_REQUIRE(pt_channels[l] >= 1 && img_channels[l] >= 1 && emb_channels[l] >= 1,
                 "config: channel counts must be positive");
    DGSF_REQUIRE(std::isfinite(loss_weights[l]) && loss_weights[l] > 0.0, "config: loss weights must be positive");
  }
  for (const KernelSpec* s : {&setconv, &corr_coarse, &corr_fine, &self, &upconv}) s->validate();
  DGSF_REQUIRE(std::isfinite(max_dist) && max_dist > 0.0f, "config: max_dist must be positive");
  DGSF_REQUIRE(std::isfinite(flow2d_weight) && flow2d_weight >= 0.0, "config: flow2d_weight must be >= 0");
  DGSF_REQUIRE(train_steps >= 0, "config: train_steps must be >= 0");
  DGSF_REQUIRE(std::isfinite(step_size) && step_size > 0.0, "config: step_size must be positive");
}

NetworkConfig NetworkConfig::parse(std::string_view text) {
  NetworkConfig c;
  for (const auto& [k, v] : io::parse_key_values(text)) {
    if (k == "levels") c.levels = parse_int(k, v);
    else if (k == "pt_channels") c.pt_channels = parse_ints(k, v);
    else if (k == "img_channels") c.img_channels = parse_ints(k, v);
    else if (k == "emb_channels") c.emb_channels = parse_ints(k, v);
    else if (k == "setconv_window") parse_window(k, v, c.setconv);
    else if (k == "setconv_k") c.setconv.K = parse_int(k, v);
    else if (k == "corr_coarse_window") parse_window(k, v, c.corr_coarse);
    else if (k == "corr_coarse_k") c.corr_coarse.K = parse_int(k, v);
    else if (k == "corr_fine_window") parse_window(k, v, c.corr_fine);
    else if (k == "corr_fine_k") c.corr_fine.K = parse_int(k, v);
    else if (k == "self_window") parse_window(k, v, c.self);
    else if (k == "self_k") c.self.K = parse_int(k, v);
    else if (k == "upconv_window") parse_window(k, v, c.upconv);
    else if (k == "upconv_k") c.upconv.K = parse_int(k, v);
    else if (k == "max_dist") c.max_dist = static_cast<float>(parse_double(k, v));
    else if (k == "warp") {
      if (v == "full") c.warp = WarpMode::kFull;
      else if (v == "nowarp") c.warp = WarpMode::kNoWarp;
      else if (v == "reproject") c.warp = WarpMode::kReproject;
      else throw InputError("config: warp must be full, nowarp or reproject");
    } else if (k == "fusion") {
      if (v == "off") c.fusion = FusionMode::kOff;
      else if (v == "concat") c.fusion = FusionMode::kConcat;
      else if (v == "attentive") c.fusion = FusionMode::kAttentive;
      else throw InputError("config: fusion must be off, concat or attentive");
    } else if (k == "grouping") {
      if (v == "kernel") c.grouping = GroupingMode::kKernel;
      else if (v == "whole") c.grouping = GroupingMode::kWholeGrid;
      else throw InputError("config: grouping must be kernel or whole");
    } else if (k == "loss_weights") c.loss_weights = parse_doubles(k, v);
    else if (k == "flow2d_weight") c.flow2d_weight = parse_double(k, v);
    else if (k == "train_steps") c.train_steps = parse_int(k, v);
    else if (k == "step_size") c.step_size = parse_double(k, v);
    else if (k == "optimizer") {
      if (v == "adam") c.optimizer = OptimizerKind::kAdam;
      else if (v == "sgd") c.optimizer = OptimizerKind::kSgd;
      else throw InputError("config: optimizer must be adam or sgd");
    } else {
      throw InputError("config: unknown key '" + k + "'");
    }
  }
  c.validate();
  return c;
}

std::string NetworkConfig::to_text() const {
  std::ostringstream os;
  os.precision(9);
  auto window = [](const KernelSpec& s) { return std::to_string(s.k_h) + "x" + std::to_string(s.k_w); };
  os << "levels=" << levels << "\n"
     << "pt_channels=" << join(pt_channels) << "\n"
     << "img_channels=" << join(img_channels) << "\n"
     << "emb_channels=" << join(emb_channels) << "\n"
     << "setconv_window=" << window(setconv) << "\nsetconv_k=" << setconv.K << "\n"
     << "corr_coarse_window=" << window(corr_coarse) << "\ncorr_coarse_k=" << corr_coarse.K << "\n"
     << "corr_fine_window=" << window(corr_fine) << "\ncorr_fine_k=" << corr_fine.K << "\n"
     << "self_window=" << window(self) << "\nself_k=" << self.K << "\n"
     << "upconv_window=" << window(upconv) << "\nupconv_k=" << upconv.K << "\n"
     << "max_dist=" << max_dist << "\n"
     << "warp=" << warp_name(warp) << "\n"
     << "fusion=" << fusion_name(fusion) << "\n"
     << "grouping=" << (grouping == GroupingMode::kKernel ? "kernel" : "whole") << "\n"
     << "loss_weights=" << join(loss_weights) << "\n"
     << "flow2d_weight=" << flow2d_weight << "\n"
     << "train_steps=" << train_steps << "\n"
     << "step_size=" << step_size << "\n"
     << "optimizer=" << (optimizer == OptimizerKind::kAdam ? "adam" : "sgd") << "\n";
  return os.str();
}

void apply_mode(NetworkConfig& cfg, std::string_view mode) {
  if (mode == "full") cfg.warp = WarpMode::kFull;
  else if (mode == "no-warp") cfg.warp = WarpMode::kNoWarp;
  else if (mode == "reproject") cfg.warp = WarpMode::kReproject;
  else if (mode == "no-fusion") cfg.fusion = FusionMode::kOff;
  else if (mode == "concat") cfg.fusion = FusionMode::kConcat;
  else if (mode == "no-kbg") cfg.grouping = GroupingMode::kWholeGrid;
  else throw InputError("unknown mode '" + std::string(mode) + "'");
}

template <typename T>
std::vector<ParamRef<T>> NetworkWeights<T>::params() {
  std::vector<ParamRef<T>> out;
  collect_params("image", image, out);
  for (size_t l = 0; l < levels.size(); ++l) {
    LevelWeights<T>& w = levels[l];
    const std::string p = "level" + std::to_string(l) + ".";
    auto add = [&](const char* name, MlpWeights<T>& m) {
      if (!m.layers.empty()) collect_params(p + name, m, out);
    };
    add("setconv", w.setconv);
    add("fuse_gate", w.fuse_gate);
    add("fuse_proj", w.fuse_proj);
    add("fuse_out", w.fuse_out);
    add("att1", w.corr.att1);
    add("val", w.corr.val);
    add("att2", w.corr.att2);
    add("pred", w.pred);
    add("flow", w.flow);
    add("up1", w.up1);
    add("up2", w.up2);
  }
  return out;
}

template <typename T>
NetworkWeights<T> make_weights(const NetworkConfig& cfg, uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  NetworkWeights<T> w;
  if (cfg.fusion != FusionMode::kOff) w.image = make_image_encoder<T>(cfg.img_channels, rng);
  auto mlp = [&](std::initializer_list<int> dims, bool act) {
    const std::vector<int> d(dims);
    return make_mlp<T>(d, act, rng);
  };
  const int L = cfg.levels;
  for (int l = 0; l < L; ++l) {
    const int cin = l == 0 ? 3 : cfg.pt_channels[l - 1];
    const int C = cfg.pt_channels[l];
    const int E = cfg.emb_channels[l];
    const int I = cfg.img_channels[l];
    LevelWeights<T> lw;
    lw.setconv = mlp({3 + cin, C, C}, true);
    if (cfg.fusion == FusionMode::kAttentive) {
      lw.fuse_gate = mlp({I + C, C}, false);
      lw.fuse_proj = mlp({I, C}, false);
      lw.fuse_out = mlp({2 * C, C}, true);
    } else if (cfg.fusion == FusionMode::kConcat) {
      lw.fuse_out = mlp({C + I, C}, true);
    }
    lw.corr.att1 = mlp({4 + 2 * C, E, 1}, false);
    lw.corr.val = mlp({C + 3, E}, true);
    lw.corr.att2 = mlp({4 + C + E, E, 1}, false);
    lw.pred = mlp({C + 2 * E, E, E}, true);
    lw.flow = mlp({E, 3}, false);
    if (l + 1 < L) {
      lw.up1 = mlp({3 + cfg.emb_channels[l + 1], E}, true);
      lw.up2 = mlp({E + C, E}, true);
    }
    w.levels.push_back(std::move(lw));
  }
  return w;
}

template <typename T>
void zero_flow_heads(NetworkWeights<T>& w) {
  for (auto& l : w.levels)
    for (auto& layer : l.flow.layers) {
      std::fill(layer.weight.data.begin(), layer.weight.data.end(), T(0));
      std::fill(layer.bias.data.begin(), layer.bias.data.end(), T(0));
    }
}

namespace {

template <typename F>
auto staged(const char* stage, int level, F&& fn) {
  const std::string where = std::string(stage) + " (level " + std::to_string(level) + "): ";
  try {
    return fn();
  } catch (const InputError& e) {
    throw InputError(where + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError(where + e.what());
  }
}

KernelSpec with_radius(KernelSpec s, float r) {
  s.max_dist = r;
  return s;
}

template <typename T>
std::vector<PyramidLevel<T>> encode_frame(Tape<T>& tape, const PointImage& pc, const RgbImage& img,
                                          const NetworkWeights<T>& w, const NetworkConfig& cfg) {
  EncodedImage<T> enc;
  if (cfg.fusion != FusionMode::kOff) {
    DGSF_REQUIRE(img.height == pc.height && img.width == pc.width, "forward: image and point grid differ in size");
    enc = staged("image encoder", 0, [&] {
      return encode_image(tape.constant(image_matrix<T>(img)), GridShape{img.height, img.width}, w.image);
    });
    DGSF_REQUIRE(static_cast<int>(enc.levels.size()) >= cfg.levels, "forward: image encoder has too few levels");
  }
  std::vector<PyramidLevel<T>> out;
  PointImage pts = pc;
  Var<T> feats = tape.constant(grid_matrix<T>(pc));
  for (int l = 0; l < cfg.levels; ++l) {
    const int src_stride = 1 << l;
    const float radius = cfg.max_dist * static_cast<float>(src_stride);
    KernelSpec spec = with_radius(cfg.setconv, radius);
    if (cfg.grouping == GroupingMode::kWholeGrid) spec = KernelSpec::whole_grid(pts.height, pts.width, spec.K, radius);
    PyramidLevel<T> lvl = staged("setconv", l, [&] {
      return setconv_down(pts, feats, 2, spec, w.levels[l].setconv, l, 2 * src_stride);
    });
    const LevelWeights<T>& lw = w.levels[l];
    if (cfg.fusion != FusionMode::kOff) {
      DGSF_REQUIRE(enc.shapes[l].height == lvl.points.height && enc.shapes[l].width == lvl.points.width,
                   "forward: image and point pyramids misaligned");
      lvl.features = staged("fusion", l, [&] {
        return cfg.fusion == FusionMode::kAttentive
                   ? fuse(enc.levels[l], lvl.features, lw.fuse_gate, lw.fuse_proj, lw.fuse_out, lvl.points.valid)
                   : fuse_concat(enc.levels[l], lvl.features, lw.fuse_out, lvl.points.valid);
      });
    }
    pts = lvl.points;
    feats = lvl.features;
    out.push_back(std::move(lvl));
  }
  return out;
}

}  // namespace

template <typename T>
ForwardResult<T> forward(Tape<T>& tape, const Scene& scene, const NetworkWeights<T>& w, const NetworkConfig& cfg) {
  cfg.validate();
  DGSF_REQUIRE(static_cast<int>(w.levels.size()) == cfg.levels, "forward: weights do not match level count");
  DGSF_REQUIRE(scene.pc1.height == scene.pc2.height && scene.pc1.width == scene.pc2.width,
               "forward: frames differ in size");
  DGSF_REQUIRE(scene.intr.width == scene.pc1.width && scene.intr.height == scene.pc1.height,
               "forward: intrinsics do not match grid");
  const auto p1 = encode_frame(tape, scene.pc1, scene.img1, w, cfg);
  const auto p2 = encode_frame(tape, scene.pc2, scene.img2, w, cfg);
  const int L = cfg.levels;

  std::vector<CameraIntrinsics> intr(L);
  CameraIntrinsics cur = scene.intr;
  for (int l = 0; l < L; ++l) intr[l] = cur = cur.strided(2);

  ForwardResult<T> r;
  r.flows.resize(L);
  r.embeddings.resize(L);
  for (int l = 0; l < L; ++l) r.points.push_back(p1[l].points);

  Var<T> refined_above;
  for (int l = L - 1; l >= 0; --l) {
    const PointImage& pts1 = p1[l].points;
    const PointImage& pts2 = p2[l].points;
    const int n = pts1.cells();
    const float radius = cfg.max_dist * static_cast<float>(p1[l].stride);
    const KernelSpec spec = with_radius(l == L - 1 ? cfg.corr_coarse : cfg.corr_fine, radius);
    const KernelSpec self = with_radius(cfg.self, radius);
    const LevelWeights<T>& lw = w.levels[l];

    Var<T> coarse, up;
    if (l == L - 1) {
      coarse = tape.constant(Matrix<T>(n, 3));
      up = tape.constant(Matrix<T>(n, cfg.emb_channels[l]));
    } else {
      const PyramidLevel<T> above{l + 1, p1[l + 1].stride, p1[l + 1].points, refined_above};
      const KernelSpec upspec = with_radius(cfg.upconv, cfg.max_dist * static_cast<float>(above.stride));
      up = staged("set_upconv", l, [&] {
        return set_upconv(above, pts1, p1[l].features, upspec, lw.up1, lw.up2);
      });
      coarse = staged("upsample", l, [&] { return upsample_nearest(r.flows[l + 1], above.points, pts1); });
    }

    r.embeddings[l] = staged("correlate", l, [&] {
      if (cfg.warp == WarpMode::kNoWarp)
        return correlate_no_warp(pts1, pts2, p1[l].features, p2[l].features, spec, self, lw.corr);
      const Var<T> warped = ops::add(tape.constant(grid_matrix<T>(pts1)), ops::mask_rows(coarse, pts1.valid));
      const WarpIndex widx =
          warp_index(matrix_grid<3>(warped.value(), pts1.height, pts1.width, pts1.valid), intr[l]);
      if (cfg.warp == WarpMode::kReproject)
        return correlate_reprojected(pts1, warped, widx, pts2, p1[l].features, p2[l].features, spec, self, lw.corr);
      return correlate(pts1, warped, widx, pts2, p1[l].features, p2[l].features, spec, self, lw.corr);
    });
    const Prediction<T> pred = staged("predict", l, [&] {
      return predict_residual(p1[l].features, r.embeddings[l], up, lw.pred, lw.flow);
    });
    r.flows[l] = refine(coarse, pred.residual);
    refined_above = pred.refined;
  }
  r.full_flow = staged("upsample", -1, [&] { return upsample_nearest(r.flows[0], p1[0].points, scene.pc1); });
  return r;
}

template <typename T>
FlowPyramid to_pyramid(const ForwardResult<T>& r, const Scene& scene) {
  FlowPyramid p;
  for (size_t l = 0; l < r.flows.size(); ++l) {
    const PointImage& pts = r.points[l];
    p.levels.push_back(matrix_grid<3>(r.flows[l].value(), pts.height, pts.width, pts.valid));
  }
  p.full = matrix_grid<3>(r.full_flow.value(), scene.pc1.height, scene.pc1.width, scene.pc1.valid);
  p.flow2d = project_flow_2d(scene.pc1, p.full, scene.intr);
  return p;
}

FlowPyramid predict(const Scene& scene, const NetworkWeights<float>& w, const NetworkConfig& cfg) {
  Tape<float> tape;
  return to_pyramid(forward(tape, scene, w, cfg), scene);
}

std::vector<FlowGrid> gt_levels(const FlowGrid& gt_full, int levels) {
  std::vector<FlowGrid> out;
  FlowGrid g = gt_full;
  for (int l = 0; l < levels; ++l) {
    g = select_cells(g, 2);
    out.push_back(g);
  }
  return out;
}

LossBreakdown multi_scale_loss(const std::vector<FlowGrid>& pred, const std::vector<FlowGrid>& gt,
                               const std::vector<double>& weights) {
  DGSF_REQUIRE(pred.size() == gt.size() && pred.size() == weights.size(), "loss: level counts differ");
  LossBreakdown b;
  for (size_t l = 0; l < pred.size(); ++l) {
    const FlowGrid& p = pred[l];
    const FlowGrid& g = gt[l];
    DGSF_REQUIRE(p.height == g.height && p.width == g.width, "loss: level shapes differ");
    double acc = 0.0;
    size_t n = 0;
    for (int c = 0; c < p.cells(); ++c) {
      if (!p.valid[c] || !g.valid[c]) continue;
      double s = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double d = static_cast<double>(g.values[3 * c + k]) - static_cast<double>(p.values[3 * c + k]);
        s += d * d;
      }
      acc += std::sqrt(s);
      ++n;
    }
    const double mean = n ? acc / static_cast<double>(n) : 0.0;
    b.level_mean.push_back(mean);
    b.empty.push_back(n == 0);
    b.total += weights[l] * mean;
  }
  return b;
}

template <typename T>
LossTerms<T> multi_scale_loss(const ForwardResult<T>& r, const Scene& scene, const NetworkConfig& cfg) {
  DGSF_REQUIRE(scene.gt_flow.height == scene.pc1.height && scene.gt_flow.width == scene.pc1.width,
               "loss: ground truth missing or misaligned");
  Tape<T>& tape = *r.full_flow.tape;
  const auto gts = gt_levels(scene.gt_flow, cfg.levels);
  LossTerms<T> out;
  for (int l = 0; l < cfg.levels; ++l) {
    const PointImage& pts = r.points[l];
    std::vector<uint8_t> mask(pts.cells());
    bool any = false;
    for (int c = 0; c < pts.cells(); ++c) any |= (mask[c] = pts.valid[c] && gts[l].valid[c]) != 0;
    out.empty.push_back(!any);
    const Var<T> err = ops::row_norm(ops::sub(r.flows[l], tape.constant(grid_matrix<T>(gts[l]))), T(0));
    const Var<T> term = ops::scale(ops::masked_mean(err, mask), static_cast<T>(cfg.loss_weights[l]));
    out.scene = l == 0 ? term : ops::add(out.scene, term);
  }
  const Flow2dGrid gt2d = project_flow_2d(scene.pc1, scene.gt_flow, scene.intr);
  std::vector<uint8_t> mask2(gt2d.valid.size());
  for (size_t c = 0; c < mask2.size(); ++c) mask2[c] = gt2d.valid[c] && scene.pc1.valid[c];
  const Var<T> pred2d = ops::project_flow(grid_matrix<T>(scene.pc1), r.full_flow, scene.intr, mask2);
  out.flow2d = ops::masked_mean(ops::row_norm(ops::sub(pred2d, tape.constant(grid_matrix<T>(gt2d))), T(0)), mask2);
  out.total = cfg.flow2d_weight > 0.0
                  ? ops::add(out.scene, ops::scale(out.flow2d, static_cast<T>(cfg.flow2d_weight)))
                  : out.scene;
  return out;
}

TrainResult toy_train(const std::vector<Scene>& scenes, const NetworkConfig& cfg, uint64_t seed) {
  return toy_train(scenes, cfg, make_weights<float>(cfg, seed));
}

TrainResult toy_train(const std::vector<Scene>& scenes, const NetworkConfig& cfg, NetworkWeights<float> init) {
  cfg.validate();
  DGSF_REQUIRE(!scenes.empty(), "toy_train: no scenes");
  TrainResult res;
  res.weights = std::move(init);
  const auto params = res.weights.params();
  Optimizer<float> opt(cfg.optimizer, cfg.step_size);
  const float inv = 1.0f / static_cast<float>(scenes.size());
  for (int step = 0; step <= cfg.train_steps; ++step) {
    Tape<float> tape;
    Var<float> total, flow2d;
    for (size_t s = 0; s < scenes.size(); ++s) {
      const auto fr = forward(tape, scenes[s], res.weights, cfg);
      const auto lt = multi_scale_loss(fr, scenes[s], cfg);
      total = s == 0 ? lt.total : ops::add(total, lt.total);
      flow2d = s == 0 ? lt.flow2d : ops::add(flow2d, lt.flow2d);
    }
    const Var<float> loss = ops::scale(total, inv);
    const double value = loss.value().data[0];
    DGSF_ASSERT(std::isfinite(value), "toy_train: non-finite loss at step " + std::to_string(step));
    res.trace.push_back(value);
    res.flow2d_trace.push_back(flow2d.value().data[0] * inv);
    if (step == cfg.train_steps) break;
    tape.backward(loss);
    opt.step(params, tape);
    for (const ParamRef<float>& p : params)
      for (float x : p.value->data)
        DGSF_ASSERT(std::isfinite(x), "toy_train: non-finite parameter '" + p.name + "' after step " +
                                          std::to_string(step));
  }
  return res;
}

std::string trace_csv(const std::vector<double>& trace) {
  std::string out = "step,loss\n";
  char buf[64];
  for (size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i, trace[i]);
    out += buf;
  }
  return out;
}

#define DGSF_INSTANTIATE_NETWORK(T)                                                                        \
  template struct NetworkWeights<T>;                                                                       \
  template NetworkWeights<T> make_weights<T>(const NetworkConfig&, uint64_t);                              \
  template void zero_flow_heads(NetworkWeights<T>&);                                                       \
  template ForwardResult<T> forward(Tape<T>&, const Scene&, const NetworkWeights<T>&, const NetworkConfig&); \
  template FlowPyramid to_pyramid(const ForwardResult<T>&, const Scene&);                                  \
  template LossTerms<T> multi_scale_loss(const ForwardResult<T>&, const Scene&, const NetworkConfig&);

DGSF_INSTANTIATE_NETWORK(float)
DGSF_INSTANTIATE_NETWORK(double)

}  // namespace dgsf
