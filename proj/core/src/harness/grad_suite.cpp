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

#include "groie/harness/grad_suite.hpp"

#include <functional>

#include "groie/blocks.hpp"
#include "groie/extractor.hpp"
#include "groie/ops.hpp"
#include "groie/roi_align.hpp"

namespace groie::harness {

namespace {

Tensor draw(const Shape& s, SeededRng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(s);
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

Var probe(Var out, std::uint64_t seed) {
  SeededRng rng(seed);
  const double n = static_cast<double>(std::max<std::int64_t>(out.value().numel(), 1));
  Tensor w = draw(out.shape(), rng, 0.5e-4 / n, 1.5e-4 / n);
  return sum(mul(out, out.tape->constant(std::move(w))));
}

struct Case {
  std::string name;
  std::function<GradCheckReport(double, double, SeededRng&)> run;
};

std::vector<RoiBox> boxes_in(SeededRng& rng, int count, std::int64_t batch, double image) {
  std::vector<RoiBox> out;
  for (int i = 0; i < count; ++i) {
    const double w = rng.uniform(2.0, image * 0.9), h = rng.uniform(2.0, image * 0.9);
    const double x = rng.uniform(0.0, image - w), y = rng.uniform(0.0, image - h);
    out.push_back(RoiBox{rng.uniform_int(0, batch - 1), x, y, x + w, y + h});
  }
  return out;
}

GradCheckReport check_extractor(const ExtractorConfig& cfg, double eps, double tol, SeededRng& rng) {
  ParamStore store;
  RoiExtractor ex(cfg, store, "groie", rng);
  for (auto& p : store)
    for (auto& v : p->value.data()) v = rng.uniform(-0.5, 0.5);
  std::vector<Parameter> levels;
  for (int k = 2; k <= 5; ++k) {
    const std::int64_t e = 32 >> k;
    levels.emplace_back("pyramid.level" + std::to_string(k), draw(Shape{2, cfg.channels, e, e}, rng));
  }
  auto boxes = boxes_in(rng, 2, 2, 32.0);
  const std::uint64_t level_seed = rng.next_u64();
  std::vector<Parameter*> params = store.pointers();
  for (auto& l : levels) params.push_back(&l);
  return check_gradients(
      [&](Tape& t) {
        FeaturePyramid p;
        for (auto& l : levels) p.levels.push_back(t.param(l));
        SeededRng draw_levels(level_seed);
        return probe(ex.extract(t, p, boxes, draw_levels).features, 11);
      },
      params, eps, tol);
}

std::vector<Case> cases() {
  std::vector<Case> c;
  c.push_back({"op/conv2d", [](double eps, double tol, SeededRng& rng) {
                 Parameter x("x", draw({2, 3, 6, 5}, rng)), w("w", draw({4, 3, 3, 3}, rng)), b("b", draw({4}, rng));
                 std::vector<Parameter*> ps{&x, &w, &b};
                 return check_gradients(
                     [&](Tape& t) { return probe(conv2d(t.param(x), t.param(w), t.param(b), 2, 1), 1); }, ps, eps,
                     tol);
               }});
  c.push_back({"op/linear", [](double eps, double tol, SeededRng& rng) {
                 Parameter x("x", draw({5, 7}, rng)), w("w", draw({7, 3}, rng)), b("b", draw({3}, rng));
                 std::vector<Parameter*> ps{&x, &w, &b};
                 return check_gradients([&](Tape& t) { return probe(linear(t.param(x), t.param(w), t.param(b)), 2); },
                                        ps, eps, tol);
               }});
  c.push_back({"op/softmax", [](double eps, double tol, SeededRng& rng) {
                 Parameter x("x", draw({2, 3, 4, 5}, rng, -2, 2));
                 std::vector<Parameter*> ps{&x};
                 return check_gradients(
                     [&](Tape& t) {
                       Var v = t.param(x);
                       return add(add(probe(softmax(v, 1), 3), probe(softmax(v, 3), 4)), probe(softmax(v, 2), 5));
                     },
                     ps, eps, tol);
               }});
  c.push_back({"op/bmm+pointwise", [](double eps, double tol, SeededRng& rng) {
                 Parameter a("a", draw({2, 3, 4}, rng)), b("b", draw({2, 4, 5}, rng));
                 std::vector<Parameter*> ps{&a, &b};
                 return check_gradients(
                     [&](Tape& t) {
                       Var m = bmm(t.param(a), t.param(b));
                       Var s = sigmoid(scale(m, 0.7));
                       Var r = relu(sub(m, mul(s, s)));
                       return probe(transpose_last2(add(r, s)), 6);
                     },
                     ps, eps, tol);
               }});
  c.push_back({"op/shape", [](double eps, double tol, SeededRng& rng) {
                 Parameter a("a", draw({3, 2, 2, 2}, rng)), b("b", draw({3, 1, 2, 2}, rng));
                 std::vector<Parameter*> ps{&a, &b};
                 const std::vector<std::int64_t> idx{2, 0, 2};
                 return check_gradients(
                     [&](Tape& t) {
                       Var cat = concat_channels({t.param(a), t.param(b)});
                       Var up = upsample_nearest2x(cat);
                       Var sel = select_rows(reshape(up, Shape{3, 3 * 16}), idx);
                       return add(probe(sel, 7), mean(scale(up, 1e-4)));
                     },
                     ps, eps, tol);
               }});
  c.push_back({"op/relative_position_logits", [](double eps, double tol, SeededRng& rng) {
                 Parameter q("q", draw({2, 2, 3, 9}, rng)), tab("table", draw({2, 3, 25}, rng));
                 std::vector<Parameter*> ps{&q, &tab};
                 return check_gradients(
                     [&](Tape& t) { return probe(relative_position_logits(t.param(q), t.param(tab), 3), 8); }, ps, eps,
                     tol);
               }});
  c.push_back({"loss/cross_entropy", [](double eps, double tol, SeededRng& rng) {
                 Parameter x("logits", draw({6, 4}, rng, -2, 2));
                 const std::vector<int> labels{0, 3, 1, 1, 2, 0};
                 std::vector<Parameter*> ps{&x};
                 return check_gradients([&](Tape& t) { return scale(cross_entropy(t.param(x), labels), 1e-4); }, ps,
                                        eps, tol);
               }});
  c.push_back({"loss/smooth_l1", [](double eps, double tol, SeededRng& rng) {
                 Parameter x("pred", draw({5, 4}, rng, -2, 2));
                 Tensor target = draw({5, 4}, rng, -2, 2);
                 std::vector<Parameter*> ps{&x};
                 return check_gradients([&](Tape& t) { return scale(smooth_l1(t.param(x), target), 1e-4); }, ps, eps,
                                        tol);
               }});
  c.push_back({"loss/bce", [](double eps, double tol, SeededRng& rng) {
                 Parameter x("prob", draw({3, 1, 4, 4}, rng, 0.05, 0.95));
                 Tensor target = draw({3, 1, 4, 4}, rng, 0, 1);
                 for (auto& v : target.data()) v = v < 0.5 ? 0.0 : 1.0;
                 std::vector<Parameter*> ps{&x};
                 return check_gradients([&](Tape& t) { return scale(bce(t.param(x), target), 1e-4); }, ps, eps, tol);
               }});
  c.push_back({"roi_align", [](double eps, double tol, SeededRng& rng) {
                 Parameter level("level", draw({2, 3, 8, 8}, rng));
                 auto boxes = boxes_in(rng, 4, 2, 32.0);
                 std::vector<Parameter*> ps{&level};
                 return check_gradients(
                     [&](Tape& t) { return probe(roi_align(t.param(level), boxes, RoiAlignParams{7, 2, 0.25}), 9); },
                     ps, eps, tol);
               }});
  for (auto kind : {BlockKind::Conv1, BlockKind::Conv3, BlockKind::Conv5, BlockKind::NonLocal, BlockKind::Attention}) {
    c.push_back({"block/" + block_kind_name(kind), [kind](double eps, double tol, SeededRng& rng) {
                   ParamStore store;
                   auto block = make_block(kind, store, "block", 8, 7, 4, rng);
                   for (auto& p : store)
                     for (auto& v : p->value.data()) v = rng.uniform(-0.5, 0.5);
                   Parameter x("x", draw({2, 8, 7, 7}, rng));
                   std::vector<Parameter*> ps = store.pointers();
                   ps.push_back(&x);
                   return check_gradients([&](Tape& t) { return probe(block->forward(t, t.param(x)), 10); }, ps, eps,
                                          tol);
                 }});
  }
  for (auto s : {Strategy::SingleLevel, Strategy::RandomLevel, Strategy::Sum, Strategy::SumPlus, Strategy::Concat}) {
    c.push_back({"extractor/" + strategy_name(s), [s](double eps, double tol, SeededRng& rng) {
                   ExtractorConfig cfg;
                   cfg.strategy = s;
                   cfg.channels = 8;
                   return check_extractor(cfg, eps, tol, rng);
                 }});
  }
  const std::tuple<BlockKind, Aggregation, BlockKind> groies[] = {
      {BlockKind::Conv5, Aggregation::Sum, BlockKind::Attention},
      {BlockKind::Conv3, Aggregation::Concat, BlockKind::NonLocal},
      {BlockKind::NonLocal, Aggregation::Sum, BlockKind::Conv1},
  };
  for (const auto& [pre, agg, post] : groies) {
    ExtractorConfig cfg = ExtractorConfig::groie(pre, agg, post);
    cfg.channels = 8;
    cfg.attention_heads = 4;
    c.push_back({"extractor/" + cfg.label(),
                 [cfg](double eps, double tol, SeededRng& rng) { return check_extractor(cfg, eps, tol, rng); }});
  }
  return c;
}

}  // namespace

std::vector<GradSuiteEntry> run_gradient_suite(const std::string& filter, double tol, double eps,
                                               std::uint64_t seed) {
  std::vector<GradSuiteEntry> out;
  const SeededRng root(seed);
  std::uint64_t stream = 0;
  for (auto& c : cases()) {
    SeededRng rng = root.fork(stream++);
    if (!filter.empty() && c.name.find(filter) == std::string::npos) continue;
    out.push_back({c.name, c.run(eps, tol, rng)});
  }
  return out;
}

std::vector<GradSuiteEntry> run_gradient_suite(double tol, double eps, std::uint64_t seed) {
  return run_gradient_suite(std::string(), tol, eps, seed);
}

}  // namespace groie::harness
