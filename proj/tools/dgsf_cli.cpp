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

// Command-line front end: project, synth, flow, eval, train-toy, group-bench.
// Exit codes: 0 success, 1 input error, 2 internal invariant violation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dgsf/errors.hpp"
#include "dgsf/harness.hpp"
#include "dgsf/io.hpp"
#include "dgsf/metrics.hpp"
#include "dgsf/network.hpp"
#include "dgsf/nn.hpp"

namespace fs = std::filesystem;
using namespace dgsf;

namespace {

const std::vector<std::string> kModes{"full", "no-warp", "reproject", "no-fusion", "concat", "no-kbg"};

struct Common {
  std::string config;
  std::string mode = "full";
  uint64_t seed = 1;
  std::string out;
};

NetworkConfig load_config(const Common& c) {
  NetworkConfig cfg = c.config.empty() ? NetworkConfig{} : NetworkConfig::parse(io::read_file(c.config));
  apply_mode(cfg, c.mode);
  cfg.validate();
  return cfg;
}

void save_weights(const fs::path& path, NetworkWeights<float>& w) { io::write_file(path, encode_weights(export_params(w.params()))); }

NetworkWeights<float> load_weights(const fs::path& path, const NetworkConfig& cfg) {
  NetworkWeights<float> w = make_weights<float>(cfg, 0);
  import_params(decode_weights(io::read_file(path)), w.params());
  return w;
}

std::vector<uint8_t> joint_mask(const FlowGrid& pred, const FlowGrid& gt, const PointImage& pc1) {
  DGSF_REQUIRE(pred.height == gt.height && pred.width == gt.width && pc1.height == gt.height &&
                   pc1.width == gt.width,
               "eval: prediction, ground truth and scene sizes differ");
  std::vector<uint8_t> m(gt.cells());
  for (int c = 0; c < gt.cells(); ++c) m[c] = pred.valid[c] && gt.valid[c] && pc1.valid[c];
  return m;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty())
    std::cout << text;
  else
    io::write_file(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense grid scene flow toolkit"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool config, bool mode) {
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--out", common.out, "output file or directory");
    if (config) sub->add_option("--config", common.config, "network config (key=value lines)")->check(CLI::ExistingFile);
    if (mode) sub->add_option("--mode", common.mode, "ablation arm")->check(CLI::IsMember(kModes));
  };

  // project
  std::string cloud_path, intr_path;
  double depth_max = 35.0;
  auto* project = app.add_subcommand("project", "project a raw cloud onto the camera grid");
  project->add_option("--cloud", cloud_path, "cloud file")->required()->check(CLI::ExistingFile);
  project->add_option("--intrinsics", intr_path, "intrinsics text file")->required()->check(CLI::ExistingFile);
  project->add_option("--depth-max", depth_max, "far clipping depth in meters");
  add_common(project, false, false);

  // synth
  int height = 48, width = 64, objects = 4;
  SynthOptions synth_opts;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic frame pair with ground truth");
  synth_cmd->add_option("--height", height);
  synth_cmd->add_option("--width", width);
  synth_cmd->add_option("--objects", objects);
  synth_cmd->add_option("--min-motion", synth_opts.min_motion, "lower end of the motion draw in [0, 1]");
  synth_cmd->add_option("--motion-scale", synth_opts.motion_scale);
  synth_cmd->add_option("--noise", synth_opts.noise);
  add_common(synth_cmd, false, false);

  // flow
  std::string scene_dir, weights_path;
  auto* flow = app.add_subcommand("flow", "run the network on a scene");
  flow->add_option("--scene", scene_dir, "scene directory")->required()->check(CLI::ExistingDirectory);
  flow->add_option("--weights", weights_path, "weights file; seeded init when omitted")->check(CLI::ExistingFile);
  add_common(flow, true, true);

  // eval
  std::string pred_path, gt_path, label = "pred";
  bool csv = false;
  auto* eval = app.add_subcommand("eval", "score a predicted flow grid");
  eval->add_option("--scene", scene_dir, "scene directory (intrinsics, pc1)")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--pred", pred_path, "predicted flow grid")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", gt_path, "ground-truth flow grid; defaults to the scene's")->check(CLI::ExistingFile);
  eval->add_option("--label", label);
  eval->add_flag("--csv", csv, "CSV instead of an aligned table");
  add_common(eval, false, false);

  // train-toy
  std::vector<std::string> scene_dirs;
  int steps = -1;
  auto* train = app.add_subcommand("train-toy", "fit the network on a few scenes");
  train->add_option("--scene", scene_dirs, "scene directory (repeatable)")->required()->check(CLI::ExistingDirectory);
  train->add_option("--steps", steps, "overrides train_steps");
  add_common(train, true, true);

  // group-bench
  int n_points = 56269, repeats = 5, kh = 7, kw = 9, k = 16;
  int bench_h = 270, bench_w = 480;
  auto* bench = app.add_subcommand("group-bench", "time kernel grouping against brute force");
  bench->add_option("--n", n_points, "valid points");
  bench->add_option("--repeats", repeats, "timed repeats (>= 5)");
  bench->add_option("--kh", kh);
  bench->add_option("--kw", kw);
  bench->add_option("--k", k);
  bench->add_option("--height", bench_h);
  bench->add_option("--width", bench_w);
  bench->add_flag("--csv", csv, "CSV instead of text");
  add_common(bench, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*project) {
      const CameraIntrinsics intr = io::decode_intrinsics(io::read_file(intr_path));
      const PointImage g = project_points(io::decode_cloud(io::read_file(cloud_path)), intr, depth_max);
      DGSF_REQUIRE(!common.out.empty(), "project: --out is required");
      io::write_file(common.out, io::encode_grid(g));
    } else if (*synth_cmd) {
      DGSF_REQUIRE(!common.out.empty(), "synth: --out is required");
      write_scene(common.out, synth(common.seed, height, width, objects, synth_opts).scene);
    } else if (*flow) {
      DGSF_REQUIRE(!common.out.empty(), "flow: --out is required");
      const NetworkConfig cfg = load_config(common);
      const Scene scene = read_scene(scene_dir);
      NetworkWeights<float> w =
          weights_path.empty() ? make_weights<float>(cfg, common.seed) : load_weights(weights_path, cfg);
      const FlowPyramid p = predict(scene, w, cfg);
      const fs::path out = common.out;
      fs::create_directories(out);
      io::write_file(out / "flow.grid", io::encode_grid(p.full));
      if (scene.gt_flow.cells() > 0) {
        const auto mask = joint_mask(p.full, scene.gt_flow, scene.pc1);
        io::write_file(out / "error_map.ppm", error_map_ppm(p.full, scene.gt_flow, mask));
        std::cout << report_table({{common.mode, evaluate(p.full, scene.gt_flow, mask, scene.intr, scene.pc1)}});
      }
    } else if (*eval) {
      const Scene scene = read_scene(scene_dir);
      const FlowGrid pred = io::decode_grid(io::read_file(pred_path));
      const FlowGrid gt = gt_path.empty() ? scene.gt_flow : io::decode_grid(io::read_file(gt_path));
      DGSF_REQUIRE(gt.cells() > 0, "eval: no ground truth");
      const EvalReport r = evaluate(pred, gt, joint_mask(pred, gt, scene.pc1), scene.intr, scene.pc1);
      emit(csv ? report_csv({{label, r}}) : report_table({{label, r}}), common.out);
    } else if (*train) {
      DGSF_REQUIRE(!common.out.empty(), "train-toy: --out is required");
      NetworkConfig cfg = load_config(common);
      if (steps >= 0) cfg.train_steps = steps;
      std::vector<Scene> scenes;
      for (const auto& d : scene_dirs) scenes.push_back(read_scene(d));
      TrainResult t = toy_train(scenes, cfg, common.seed);
      const fs::path out = common.out;
      fs::create_directories(out);
      save_weights(out / "weights.bin", t.weights);
      io::write_file(out / "trace.csv", trace_csv(t.trace));
      io::write_file(out / "config.txt", cfg.to_text());
      std::printf("loss %.6f -> %.6f over %d steps\n", t.trace.front(), t.trace.back(), cfg.train_steps);
    } else if (*bench) {
      const BenchReport r = bench_grouping(n_points, KernelSpec{kh, kw, k}, repeats, common.seed, bench_h, bench_w);
      emit(csv ? bench_csv(r) : bench_text(r), common.out);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
