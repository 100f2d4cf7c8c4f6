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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when a gating criterion fails; the strategy comparison (6) is reported only.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "groie/blocks.hpp"
#include "groie/extractor.hpp"
#include "groie/harness/experiments.hpp"
#include "groie/harness/grad_suite.hpp"
#include "groie/harness/metrics.hpp"
#include "groie/harness/train.hpp"
#include "groie/ops.hpp"
#include "groie/pyramid.hpp"
#include "groie/roi_align.hpp"
#include "support/ap_oracle.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace groie;
using namespace groie::harness;
using groie::testing::random_tensor;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<RoiBox> random_boxes(SeededRng& rng, int count, std::int64_t batch, double extent) {
  std::vector<RoiBox> boxes;
  for (int i = 0; i < count; ++i) {
    const double w = rng.uniform(1.0, extent * 0.8), h = rng.uniform(1.0, extent * 0.8);
    const double x = rng.uniform(-0.1 * extent, extent - w), y = rng.uniform(-0.1 * extent, extent - h);
    boxes.push_back(RoiBox{rng.uniform_int(0, batch - 1), x, y, x + w, y + h});
  }
  return boxes;
}

void randomize(ParamStore& store, SeededRng& rng) {
  for (auto& p : store)
    for (auto& v : p->value.data()) v = rng.uniform(-0.5, 0.5);
}

// 1 ---------------------------------------------------------------------------
Outcome gradient_suite() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  auto entries = run_gradient_suite(1e-5, 1e-5, 0);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  for (const auto& e : entries) {
    worst = std::max(worst, e.report.max_rel_err());
    o.check(e.report.pass, e.name + " max rel err " + fmt("%.2e", e.report.max_rel_err()));
  }
  o.check(entries.size() >= 20, std::to_string(entries.size()) + " checks");
  o.check(worst < 1e-5, "worst relative error " + fmt("%.2e", worst) + " < 1e-5");
  o.check(secs < 300.0, "runtime " + fmt("%.1f", secs) + " s < 300 s");
  return o;
}

// 2 ---------------------------------------------------------------------------
Outcome oracle_suite() {
  Outcome o;
  SeededRng rng(2024);
  int conv_ok = 0, conv_n = 0;
  for (int trial = 0; trial < 120; ++trial, ++conv_n) {
    const int k = 1 + 2 * static_cast<int>(rng.uniform_int(0, 2));
    const int stride = static_cast<int>(rng.uniform_int(1, 2));
    const int pad = static_cast<int>(rng.uniform_int(0, k / 2 + 1));
    const auto n = rng.uniform_int(1, 9), ci = rng.uniform_int(1, 12), co = rng.uniform_int(1, 20);
    const auto h = rng.uniform_int(std::max<std::int64_t>(1, k - 2 * pad), 14);
    const auto w = rng.uniform_int(std::max<std::int64_t>(1, k - 2 * pad), 14);
    Tensor x = random_tensor(Shape{n, ci, h, w}, rng), wt = random_tensor(Shape{co, ci, k, k}, rng);
    Tensor b = random_tensor(Shape{co}, rng);
    Tape t;
    conv_ok += conv2d(t.constant(x), t.constant(wt), t.constant(b), stride, pad).value() ==
               testing::conv2d_naive(x, wt, b, stride, pad);
  }
  o.check(conv_ok == conv_n, "conv2d bitwise vs six-loop oracle: " + std::to_string(conv_ok) + "/" +
                                 std::to_string(conv_n));

  int lin_ok = 0, lin_n = 0;
  for (int trial = 0; trial < 120; ++trial, ++lin_n) {
    const auto r = rng.uniform_int(1, 40), d = rng.uniform_int(1, 70), e = rng.uniform_int(1, 40);
    Tensor x = random_tensor(Shape{r, d}, rng), w = random_tensor(Shape{d, e}, rng), b = random_tensor(Shape{e}, rng);
    Tape t;
    lin_ok += linear(t.constant(x), t.constant(w), t.constant(b)).value() == testing::linear_naive(x, w, b);
  }
  o.check(lin_ok == lin_n, "linear bitwise vs double-loop oracle: " + std::to_string(lin_ok) + "/" +
                               std::to_string(lin_n));

  double nl_err = 0.0, att_err = 0.0;
  for (int S : {3, 7, 14}) {
    ParamStore store;
    NonLocalBlock nl(store, "nl", 8, rng);
    AttentionBlock att(store, "att", 8, S, 4, rng);
    randomize(store, rng);
    Tensor x = random_tensor(Shape{2, 8, S, S}, rng);
    Tape t;
    nl_err = std::max(nl_err, max_abs_diff(nl.forward(t, t.constant(x)).value(),
                                           testing::non_local_naive(x, nl.theta_weight().value, nl.theta_bias().value,
                                                                    nl.phi_weight().value, Tensor(Shape{4}),
                                                                    nl.g_weight().value, nl.g_bias().value,
                                                                    nl.out_weight().value, nl.out_bias().value)));
    att_err = std::max(att_err, max_abs_diff(att.forward(t, t.constant(x)).value(),
                                             testing::attention_naive(x, S, 4, att.query_weight().value,
                                                                      att.query_bias().value, att.rel_table().value,
                                                                      att.value_weight().value, att.value_bias().value,
                                                                      att.out_weight().value, att.out_bias().value)));
  }
  o.check(nl_err <= 1e-10, "non-local vs pairwise loop: max diff " + fmt("%.2e", nl_err));
  o.check(att_err <= 1e-10, "attention vs pairwise loop: max diff " + fmt("%.2e", att_err));

  int ra_ok = 0, ra_n = 0;
  for (int trial = 0; trial < 100; ++trial, ++ra_n) {
    const auto n = rng.uniform_int(1, 2), c = rng.uniform_int(1, 4);
    const auto h = rng.uniform_int(2, 16), w = rng.uniform_int(2, 16);
    const double scale = 1.0 / static_cast<double>(1 << rng.uniform_int(0, 5));
    Tensor level = random_tensor(Shape{n, c, h, w}, rng);
    auto boxes = random_boxes(rng, static_cast<int>(rng.uniform_int(1, 8)), n,
                              static_cast<double>(std::max(h, w)) / scale);
    const int S = static_cast<int>(rng.uniform_int(1, 14)), ratio = static_cast<int>(rng.uniform_int(1, 3));
    Tape t;
    ra_ok += roi_align(t.constant(level), boxes, RoiAlignParams{S, ratio, scale}).value() ==
             testing::roi_align_naive(level, boxes, S, ratio, scale);
  }
  o.check(ra_ok == ra_n, "roi_align bitwise vs per-sample bilinear: " + std::to_string(ra_ok) + "/" +
                             std::to_string(ra_n));
  Tape t;
  const std::vector<RoiBox> b{RoiBox{0, 0, 0, 2, 2}};
  const double v =
      roi_align(t.constant(Tensor(Shape{1, 1, 2, 2}, {1, 2, 3, 4})), b, RoiAlignParams{1, 1, 1.0}).value()[0];
  o.check(v == 2.5, "2x2 hand case = " + fmt("%.17g", v));
  return o;
}

// 3 ---------------------------------------------------------------------------
Outcome structural() {
  Outcome o;
  SeededRng rng(3);
  const std::int64_t C = 8;
  std::vector<Tensor> levels;
  for (int k = 2; k <= 5; ++k) levels.push_back(random_tensor(Shape{2, C, 64 >> k, 64 >> k}, rng));
  auto boxes = random_boxes(rng, 12, 2, 64.0);
  auto pyramid = [&](Tape& t) {
    FeaturePyramid p;
    for (const auto& l : levels) p.levels.push_back(t.constant(l));
    return p;
  };
  ExtractorConfig sum_cfg;
  sum_cfg.channels = C;
  ParamStore store;
  auto sum = build_extractor(sum_cfg, store, rng, "sum");
  Tape t;
  const Tensor ref = sum.extract(t, pyramid(t), boxes, rng).features.value();

  auto plain = ExtractorConfig::groie(BlockKind::None, Aggregation::Sum, BlockKind::None);
  plain.channels = C;
  auto g0 = build_extractor(plain, store, rng, "g0");
  o.check(g0.extract(t, pyramid(t), boxes, rng).features.value() == ref, "groie(none,sum,none) == sum bitwise");

  for (auto kind : {BlockKind::NonLocal, BlockKind::Attention}) {
    ParamStore s;
    auto block = make_block(kind, s, "b", C, 7, 4, rng);
    Tensor x = random_tensor(Shape{5, C, 7, 7}, rng);
    o.check(block->forward(t, t.constant(x)).value() == x,
            block_kind_name(kind) + " block at init is the identity (bitwise)");
  }
  auto att_cfg = ExtractorConfig::groie(BlockKind::NonLocal, Aggregation::Sum, BlockKind::Attention);
  att_cfg.channels = C;
  att_cfg.attention_heads = 4;
  auto g1 = build_extractor(att_cfg, store, rng, "g1");
  o.check(g1.extract(t, pyramid(t), boxes, rng).features.value() == ref,
          "groie(nonlocal,sum,attention) at init == sum bitwise");

  ExtractorConfig concat_cfg;
  concat_cfg.strategy = Strategy::Concat;
  concat_cfg.channels = C;
  auto concat = build_extractor(concat_cfg, store, rng, "concat");
  Tensor& w = concat.reduce_weight()->value;
  w.fill(0.0);
  concat.reduce_bias()->value.fill(0.0);
  for (std::int64_t c = 0; c < C; ++c)
    for (std::int64_t l = 0; l < 4; ++l) w[c * 4 * C + l * C + c] = 1.0;
  const double d = max_abs_diff(concat.extract(t, pyramid(t), boxes, rng).features.value(), ref);
  o.check(d <= 1e-10, "concat with stacked identities vs sum: max diff " + fmt("%.2e", d));

  const AssignConfig a;
  auto level_of = [&](double side) { return assign_level(RoiBox{0, 0, 0, side, side}, a); };
  o.check(level_of(224) == 4, "224 px box -> level k0 = 4");
  o.check(level_of(112) == 3, "112 px box -> level k0 - 1 = 3");
  o.check(unclamped_level(RoiBox{0, 0, 0, 1000, 1000}, a) == 6 && level_of(1000) == 5,
          "1000 px box -> 6 before clamping, 5 after");
  o.check(level_of(4) == 2, "4 px box clamps to level 2");
  return o;
}

// 4 ---------------------------------------------------------------------------
Outcome ap_evaluator() {
  Outcome o;
  auto box = [](double x1, double y1, double x2, double y2) { return RoiBox{0, x1, y1, x2, y2}; };
  std::vector<GtInstance> gts{{0, kCircle, box(0, 0, 10, 10), {}}, {0, kCircle, box(50, 50, 60, 60), {}}};
  std::vector<Detection> exact{{0, kCircle, 0.4, gts[0].box, {}}, {0, kCircle, 0.2, gts[1].box, {}}};
  const double a1 = compute_ap(exact, gts, 0.5);
  o.check(a1 == 1.0, "predictions equal to ground truth -> " + fmt("%.4f", a1));
  const double a2 = compute_ap(std::vector<Detection>{}, gts, 0.5);
  o.check(a2 == 0.0, "no predictions -> " + fmt("%.4f", a2));
  std::vector<Detection> curve{{0, kCircle, 0.9, box(0, 0, 10, 10), {}},
                               {0, kCircle, 0.8, box(100, 100, 110, 110), {}},
                               {0, kCircle, 0.7, box(50, 50, 60, 60), {}}};
  const double a3 = compute_ap(curve, gts, 0.5);
  const double sweep = testing::ap_threshold_sweep(curve, gts, 0.5);
  o.check(std::abs(a3 - sweep) <= 1e-4 && std::abs(a3 - 0.8350) <= 1e-4,
          "TP/FP/TP -> " + fmt("%.6f", a3) + ", threshold sweep " + fmt("%.6f", sweep) + ", expected 0.8350");
  return o;
}

// 5 ---------------------------------------------------------------------------
Outcome desk_training(const fs::path& out) {
  Outcome o;
  for (std::uint64_t seed : {0, 1, 2}) {
    RunConfig c;
    c.seed = seed;
    c.extractor = parse_extractor_spec("sum", c.channels);
    auto r = train(c, (out / ("c5_sum_seed" + std::to_string(seed))).string());
    o.check(r.final_report.ap_box_50 >= 0.5, "seed " + std::to_string(seed) + ": AP_box@0.5 " +
                                                 fmt("%.4f", r.final_report.ap_box_50) + " >= 0.5");
    o.check(r.seconds <= 1800.0, "seed " + std::to_string(seed) + ": " + fmt("%.0f", r.seconds) + " s <= 1800 s");
  }
  return o;
}

// 6 ---------------------------------------------------------------------------
Outcome strategy_comparison(const fs::path& out, int scenes, int epochs, const std::vector<std::string>& strategies) {
  Outcome o;
  RunConfig base;
  base.scenes = scenes;
  base.epochs = epochs;
  base.eval_each_epoch = false;
  auto rows = compare(base, strategies, {0, 1, 2});
  auto summary = summarize_compare(rows);
  fs::create_directories(out);
  std::ofstream(out / "c6_compare.csv") << compare_csv(rows);
  const std::string table = compare_table(summary);
  std::ofstream(out / "c6_compare.txt") << table;
  std::istringstream lines(table);
  for (std::string line; std::getline(lines, line);) o.notes.push_back("     " + line);

  const CompareSummary* baseline = nullptr;
  const CompareSummary* groie = nullptr;
  for (const auto& s : summary) {
    if (s.strategy == "single") baseline = &s;
    if (s.strategy == "groie(conv5,sum,attention)") groie = &s;
  }
  if (!baseline || !groie) {
    o.check(false, "comparison needs both single and groie(conv5,sum,attention)");
    return o;
  }
  o.check(groie->mean_box_50 >= baseline->mean_box_50 - 0.02,
          "groie mean AP_box@0.5 " + fmt("%.4f", groie->mean_box_50) + " >= single " +
              fmt("%.4f", baseline->mean_box_50) + " - 0.02 (" + std::to_string(scenes) + " scenes, " +
              std::to_string(epochs) + " epochs)");
  return o;
}

// 7 ---------------------------------------------------------------------------
Outcome determinism(const fs::path& out) {
  Outcome o;
  for (const char* strategy : {"sum", "random"}) {
    RunConfig c;
    c.scenes = 16;
    c.epochs = 2;
    c.eval_scenes = 8;
    c.extractor = parse_extractor_spec(strategy, c.channels);
    const fs::path a = out / (std::string("c7_") + strategy + "_a"), b = out / (std::string("c7_") + strategy + "_b");
    train(c, a.string());
    train(c, b.string());
    const std::string ca = slurp(a / "metrics.csv"), cb = slurp(b / "metrics.csv");
    o.check(!ca.empty() && ca == cb, std::string(strategy) + ": identical metrics.csv across two runs");
    o.check(slurp(a / "model.ckpt") == slurp(b / "model.ckpt"), std::string(strategy) + ": identical checkpoints");
  }
  SeededRng rng(7);
  const AssignConfig a;
  std::array<int, 4> counts{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[random_level(rng, a) - a.k_min];
  const double p = 0.25, sigma = std::sqrt(draws * p * (1 - p));
  double worst = 0.0;
  for (int c : counts) worst = std::max(worst, std::abs(c - draws * p) / sigma);
  o.check(worst <= 4.0, "random level counts " + std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
                            std::to_string(counts[2]) + "/" + std::to_string(counts[3]) + ", worst " +
                            fmt("%.2f", worst) + " sigma <= 4");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string out = "acceptance_out";
  int c6_scenes = 64, c6_epochs = 12;
  std::vector<std::string> c6_strategies{"single", "random", "sum", "sum_plus", "concat", "groie"};
  app.add_option("--criteria", only, "run only these (default: all)")->delimiter(',');
  app.add_option("--out", out, "directory for training artifacts")->capture_default_str();
  app.add_option("--compare-scenes", c6_scenes, "training scenes for criterion 6")->capture_default_str();
  app.add_option("--compare-epochs", c6_epochs, "epochs for criterion 6")->capture_default_str();
  app.add_option("--compare-strategies", c6_strategies)->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* name;
    bool gating;
    std::function<Outcome()> run;
  };
  const fs::path dir(out);
  const std::vector<Criterion> criteria{
      {1, "gradient suite", true, gradient_suite},
      {2, "oracle suite", true, oracle_suite},
      {3, "structural equivalences", true, structural},
      {4, "AP evaluator", true, ap_evaluator},
      {5, "desk-scale training (sum, seeds 0-2)", true, [&] { return desk_training(dir); }},
      {6, "strategy comparison (reported)", false,
       [&] { return strategy_comparison(dir, c6_scenes, c6_epochs, c6_strategies); }},
      {7, "determinism", true, [&] { return determinism(dir); }},
  };

  bool ok = true;
  std::vector<std::string> summary;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    char line[256];
    std::snprintf(line, sizeof line, "[%s] criterion %d: %s%s (%.1f s)", o.pass ? "PASS" : "FAIL", c.id, c.name,
                  c.gating ? "" : ", non-gating", secs);
    std::printf("%s\n", line);
    std::fflush(stdout);
    summary.push_back(line);
    if (c.gating) ok = ok && o.pass;
  }
  std::printf("\n");
  for (const auto& s : summary) std::printf("%s\n", s.c_str());
  std::printf("acceptance: %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}
