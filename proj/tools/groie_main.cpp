/* Copyright 2026 The GRoIE Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// groie: gradient checks, training, evaluation, comparisons and extractor
// benchmarks on the synthetic shapes dataset.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "groie/errors.hpp"
#include "groie/harness/checkpoint.hpp"
#include "groie/harness/config.hpp"
#include "groie/harness/experiments.hpp"
#include "groie/harness/grad_suite.hpp"
#include "groie/harness/scene.hpp"
#include "groie/harness/train.hpp"

namespace fs = std::filesystem;
using namespace groie;
using namespace groie::harness;

namespace {

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
}

void print_report(const EvalReport& r) {
  std::printf("images          %d\n", r.images);
  std::printf("AP_box@0.50     %.4f\n", r.ap_box_50);
  std::printf("AP_box@0.75     %.4f\n", r.ap_box_75);
  std::printf("AP_mask@0.50    %.4f\n", r.ap_mask_50);
  for (std::size_t c = 0; c < r.per_class_ap_box_50.size(); ++c) {
    if (r.per_class_ap_box_50[c] < 0) continue;
    std::printf("  %-12s  %.4f\n", class_name(static_cast<int>(c) + 1).c_str(), r.per_class_ap_box_50[c]);
  }
  std::printf("loss cls/box/mask  %.4f %.4f %.4f\n", r.loss_cls, r.loss_box, r.loss_mask);
  std::printf("s/image         %.4f\n", r.seconds_per_image);
}

int cmd_gradcheck(double tol, double eps, const std::string& filter, std::uint64_t seed, bool verbose) {
  auto entries = run_gradient_suite(filter, tol, eps, seed);
  bool ok = !entries.empty();
  for (const auto& e : entries) {
    std::printf("%-40s max_rel_err=%.3e  %s\n", e.name.c_str(), e.report.max_rel_err(),
                e.report.pass ? "PASS" : "FAIL");
    if (verbose || !e.report.pass) std::fputs(e.report.table().c_str(), stdout);
    ok = ok && e.report.pass;
  }
  std::printf("%zu checks, %s\n", entries.size(), ok ? "all passed" : "FAILED");
  return ok ? 0 : 1;
}

int cmd_train(const std::string& config, const std::string& out, bool quiet) {
  RunConfig cfg = config_or_default(config);
  auto res = train(cfg, out, quiet ? nullptr : &std::cerr);
  print_report(res.final_report);
  std::printf("trained in %.1f s, outputs in %s\n", res.seconds, out.c_str());
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config, int scenes) {
  RunConfig cfg = config_or_default(config);
  if (scenes > 0) cfg.eval_scenes = scenes;
  cfg.validate();
  auto model = init_model(cfg);
  load_checkpoint(model->params(), checkpoint);
  auto data = generate_scenes(cfg.eval_seed, cfg.eval_scenes, cfg.scene);
  print_report(evaluate(*model, data, cfg.eval_seed, cfg.proposals, cfg.masks_per_image));
  return 0;
}

int cmd_compare(const std::string& config, const std::vector<std::string>& strategies,
                const std::vector<std::uint64_t>& seeds, const std::string& out, int epochs, int scenes) {
  RunConfig cfg = config_or_default(config);
  if (epochs > 0) cfg.epochs = epochs;
  if (scenes > 0) cfg.scenes = scenes;
  auto rows = compare(cfg, strategies, seeds, &std::cerr);
  const std::string table = compare_table(summarize_compare(rows));
  std::fputs(table.c_str(), stdout);
  if (!out.empty()) {
    fs::path csv(out);
    write_file(csv, compare_csv(rows));
    write_file(fs::path(csv).replace_extension(".txt"), table);
  }
  return 0;
}

int cmd_bench(const std::vector<std::string>& strategies, const std::vector<int>& rois, std::int64_t channels,
              int repeats) {
  auto rows = bench_extractors(strategies, rois, channels, 7, repeats);
  std::fputs(bench_table(rows).c_str(), stdout);
  return 0;
}

int cmd_scenes(std::uint64_t seed, int count, const std::string& out) {
  SceneSpec spec;
  auto scenes = generate_scenes(seed, count, spec);
  fs::create_directories(out);
  std::ostringstream boxes;
  boxes << "image,class,x1,y1,x2,y2\n";
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04d.ppm", i);
    write_ppm(scenes[i].image, (fs::path(out) / name).string());
    for (const auto& o : scenes[i].gt.objects)
      boxes << i << ',' << class_name(o.cls) << ',' << o.box.x1 << ',' << o.box.y1 << ',' << o.box.x2 << ','
            << o.box.y2 << '\n';
  }
  write_file(fs::path(out) / "boxes.csv", boxes.str());
  std::printf("wrote %d scenes to %s\n", count, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generic RoI extractor toolkit"};
  app.require_subcommand(1);

  double tol = 1e-5, eps = 1e-5;
  std::string filter;
  std::uint64_t seed = 0;
  bool verbose = false;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every differentiable component");
  gc->add_option("--tol", tol, "relative error tolerance")->capture_default_str();
  gc->add_option("--eps", eps, "central difference step")->capture_default_str();
  gc->add_option("--filter", filter, "only checks whose name contains this");
  gc->add_option("--seed", seed)->capture_default_str();
  gc->add_flag("-v,--verbose", verbose, "print per-parameter tables");

  std::string config, out, checkpoint;
  bool quiet = false;
  auto* tr = app.add_subcommand("train", "train the toy detector");
  tr->add_option("--config", config, "run config (JSON); defaults when omitted");
  tr->add_option("--out", out, "output directory")->required();
  tr->add_flag("-q,--quiet", quiet);

  int scenes = 0;
  auto* ev = app.add_subcommand("eval", "score a checkpoint on the held-out scenes");
  ev->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  ev->add_option("--config", config, "config the checkpoint was trained with");
  ev->add_option("--scenes", scenes, "override the held-out scene count");

  std::vector<std::string> strategies{"sum", "groie"};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int epochs = 0;
  auto* cmp = app.add_subcommand("compare", "train every strategy under every seed");
  cmp->add_option("--config", config, "base run config");
  cmp->add_option("--strategies", strategies)->delimiter(',')->capture_default_str();
  cmp->add_option("--seeds", seeds)->delimiter(',')->capture_default_str();
  cmp->add_option("--out", out, "results CSV; a .txt table is written next to it");
  cmp->add_option("--epochs", epochs, "override epochs");
  cmp->add_option("--scenes", scenes, "override training scene count");

  std::vector<std::string> bench_strategies{"single", "sum", "groie"};
  std::vector<int> rois{8, 64, 256};
  std::int64_t channels = 64;
  int repeats = 3;
  auto* bn = app.add_subcommand("bench", "forward cost of each extractor");
  bn->add_option("--strategies", bench_strategies)->delimiter(',')->capture_default_str();
  bn->add_option("--rois", rois)->delimiter(',')->capture_default_str();
  bn->add_option("--channels", channels)->capture_default_str();
  bn->add_option("--repeats", repeats)->capture_default_str();

  int count = 8;
  auto* sc = app.add_subcommand("scenes", "dump synthetic scenes as PPM images");
  sc->add_option("--seed", seed)->capture_default_str();
  sc->add_option("--count", count)->capture_default_str();
  sc->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gc->parsed()) return cmd_gradcheck(tol, eps, filter, seed, verbose);
    if (tr->parsed()) return cmd_train(config, out, quiet);
    if (ev->parsed()) return cmd_eval(checkpoint, config, scenes);
    if (cmp->parsed()) return cmd_compare(config, strategies, seeds, out, epochs, scenes);
    if (bn->parsed()) return cmd_bench(bench_strategies, rois, channels, repeats);
    if (sc->parsed()) return cmd_scenes(seed, count, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
