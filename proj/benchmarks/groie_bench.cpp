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

#include <benchmark/benchmark.h>

#include <cmath>

#include "groie/blocks.hpp"
#include "groie/extractor.hpp"
#include "groie/harness/config.hpp"
#include "groie/ops.hpp"
#include "groie/roi_align.hpp"

namespace {

using namespace groie;

Tensor random(const Shape& s, SeededRng& rng) {
  Tensor t(s);
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

std::vector<RoiBox> random_boxes(int count, double image, SeededRng& rng) {
  std::vector<RoiBox> out;
  for (int i = 0; i < count; ++i) {
    const double w = std::exp(rng.uniform(std::log(8.0), std::log(96.0)));
    const double h = std::exp(rng.uniform(std::log(8.0), std::log(96.0)));
    const double x = rng.uniform(0.0, image - w), y = rng.uniform(0.0, image - h);
    out.push_back(RoiBox{0, x, y, x + w, y + h});
  }
  return out;
}

void BM_Conv2dForward(benchmark::State& state) {
  const auto C = state.range(0), k = state.range(1);
  SeededRng rng(1);
  Tensor x = random({8, C, 7, 7}, rng), w = random({C, C, k, k}, rng), b = random({C}, rng);
  for (auto _ : state) {
    Tape t;
    benchmark::DoNotOptimize(conv2d(t.constant(x), t.constant(w), t.constant(b), 1, int(k / 2)).value().data());
  }
  state.counters["MAC/s"] = benchmark::Counter(double(8 * C * C * k * k * 49), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv2dForward)->Args({64, 1})->Args({64, 3})->Args({64, 5})->Unit(benchmark::kMicrosecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto C = state.range(0), k = state.range(1);
  SeededRng rng(2);
  Parameter x("x", random({8, C, 7, 7}, rng)), w("w", random({C, C, k, k}, rng)), b("b", random({C}, rng));
  for (auto _ : state) {
    Tape t;
    Var y = conv2d(t.param(x), t.param(w), t.param(b), 1, int(k / 2));
    t.backward(sum(y));
  }
}
BENCHMARK(BM_Conv2dBackward)->Args({64, 3})->Args({64, 5})->Unit(benchmark::kMicrosecond);

void BM_RoiAlign(benchmark::State& state) {
  SeededRng rng(3);
  Tensor level = random({1, 64, 32, 32}, rng);
  auto boxes = random_boxes(int(state.range(0)), 128.0, rng);
  for (auto _ : state) {
    Tape t;
    benchmark::DoNotOptimize(roi_align(t.constant(level), boxes, RoiAlignParams{7, 2, 0.25}).value().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RoiAlign)->Arg(8)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Block(benchmark::State& state) {
  const auto kind = static_cast<BlockKind>(state.range(0));
  SeededRng rng(4);
  ParamStore store;
  auto block = make_block(kind, store, "b", 64, 7, 8, rng);
  Tensor x = random({64, 64, 7, 7}, rng);
  state.SetLabel(block_kind_name(kind));
  for (auto _ : state) {
    Tape t;
    benchmark::DoNotOptimize(block->forward(t, t.constant(x)).value().data());
  }
}
BENCHMARK(BM_Block)
    ->Arg(int(BlockKind::Conv1))
    ->Arg(int(BlockKind::Conv5))
    ->Arg(int(BlockKind::NonLocal))
    ->Arg(int(BlockKind::Attention))
    ->Unit(benchmark::kMillisecond);

// Forward extraction at C=64, S=7 on a 128 x 128 image pyramid.
void BM_Extract(benchmark::State& state, const std::string& spec) {
  SeededRng rng(5);
  ExtractorConfig cfg = harness::parse_extractor_spec(spec, 64);
  cfg.assign.canonical_size = harness::RunConfig{}.canonical_size;
  ParamStore store;
  RoiExtractor ex(cfg, store, "bench", rng);
  std::vector<Tensor> levels;
  for (int k = 2; k <= 5; ++k) levels.push_back(random({1, 64, 128 >> k, 128 >> k}, rng));
  auto boxes = random_boxes(int(state.range(0)), 128.0, rng);
  std::int64_t flops = 0;
  for (auto _ : state) {
    Tape t;
    FeaturePyramid p;
    for (const auto& l : levels) p.levels.push_back(t.constant(l));
    SeededRng draw(6);
    benchmark::DoNotOptimize(ex.extract(t, p, boxes, draw).features.value().data());
    flops = t.flops();
  }
  state.counters["MAC"] = double(flops);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_Extract, single, std::string("single"))->Arg(8)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Extract, sum, std::string("sum"))->Arg(8)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Extract, concat, std::string("concat"))->Arg(8)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Extract, groie, std::string("groie"))->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
