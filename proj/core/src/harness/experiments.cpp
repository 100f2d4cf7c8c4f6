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

#include "groie/harness/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "groie/errors.hpp"

namespace groie::harness {

std::vector<CompareRow> compare(const RunConfig& base, const std::vector<std::string>& strategies,
                                const std::vector<std::uint64_t>& seeds, std::ostream* log) {
  if (strategies.empty() || seeds.empty()) throw ConfigError("compare needs at least one strategy and one seed");
  std::vector<CompareRow> rows;
  for (const auto& s : strategies) {
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.seed = seed;
      cfg.extractor = parse_extractor_spec(s, base.channels);
      cfg.extractor.out_size = base.extractor.out_size;
      cfg.extractor.sampling_ratio = base.extractor.sampling_ratio;
      cfg.extractor.attention_heads = base.extractor.attention_heads;
      cfg.extractor.assign = base.extractor.assign;
      const TrainResult r = train(cfg, "", log);
      CompareRow row;
      row.strategy = cfg.extractor.label();
      row.seed = seed;
      row.ap_box_50 = r.final_report.ap_box_50;
      row.ap_box_75 = r.final_report.ap_box_75;
      row.ap_mask_50 = r.final_report.ap_mask_50;
      row.seconds = r.seconds;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<CompareSummary> summarize_compare(const std::vector<CompareRow>& rows) {
  std::vector<CompareSummary> out;
  for (const auto& r : rows) {
    CompareSummary* s = nullptr;
    for (auto& e : out)
      if (e.strategy == r.strategy) s = &e;
    if (!s) {
      out.push_back(CompareSummary{r.strategy});
      s = &out.back();
    }
    ++s->runs;
    s->mean_box_50 += r.ap_box_50;
    s->mean_box_75 += r.ap_box_75;
    s->mean_mask_50 += r.ap_mask_50;
  }
  for (auto& s : out) {
    s.mean_box_50 /= s.runs;
    s.mean_box_75 /= s.runs;
    s.mean_mask_50 /= s.runs;
    double v50 = 0, v75 = 0, vm = 0;
    for (const auto& r : rows) {
      if (r.strategy != s.strategy) continue;
      v50 += (r.ap_box_50 - s.mean_box_50) * (r.ap_box_50 - s.mean_box_50);
      v75 += (r.ap_box_75 - s.mean_box_75) * (r.ap_box_75 - s.mean_box_75);
      vm += (r.ap_mask_50 - s.mean_mask_50) * (r.ap_mask_50 - s.mean_mask_50);
    }
    if (s.runs > 1) {
      s.std_box_50 = std::sqrt(v50 / (s.runs - 1));
      s.std_box_75 = std::sqrt(v75 / (s.runs - 1));
      s.std_mask_50 = std::sqrt(vm / (s.runs - 1));
    }
  }
  return out;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::string out = "strategy,seed,ap_box_50,ap_box_75,ap_mask_50,seconds\n";
  char buf[512];
  for (const auto& r : rows) {
    // labels contain commas
    std::snprintf(buf, sizeof buf, "\"%s\",%llu,%.6f,%.6f,%.6f,%.1f\n", r.strategy.c_str(),
                  static_cast<unsigned long long>(r.seed), r.ap_box_50, r.ap_box_75, r.ap_mask_50, r.seconds);
    out += buf;
  }
  return out;
}

std::string compare_table(const std::vector<CompareSummary>& summary) {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-32s %4s  %-15s  %-15s  %-15s\n", "strategy", "runs", "AP_box@0.5",
                "AP_box@0.75", "AP_mask@0.5");
  out += buf;
  for (const auto& s : summary) {
    std::snprintf(buf, sizeof buf, "%-32s %4d  %.3f +- %.3f    %.3f +- %.3f    %.3f +- %.3f\n", s.strategy.c_str(),
                  s.runs, s.mean_box_50, s.std_box_50, s.mean_box_75, s.std_box_75, s.mean_mask_50, s.std_mask_50);
    out += buf;
  }
  return out;
}

std::vector<BenchRow> bench_extractors(const std::vector<std::string>& strategies, const std::vector<int>& rois,
                                       std::int64_t channels, int out_size, int repeats, std::uint64_t seed) {
  if (repeats < 1) throw ConfigError("bench repeats must be >= 1");
  SeededRng rng(seed);
  constexpr double kImage = 128.0;
  std::vector<Tensor> levels;
  for (int k = 2; k <= 5; ++k) {
    const std::int64_t e = static_cast<std::int64_t>(kImage) >> k;
    Tensor t(Shape{1, channels, e, e});
    for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
    levels.push_back(std::move(t));
  }
  std::vector<BenchRow> rows;
  for (const auto& name : strategies) {
    ExtractorConfig cfg = parse_extractor_spec(name, channels);
    cfg.out_size = out_size;
    cfg.assign.canonical_size = RunConfig{}.canonical_size;
    ParamStore store;
    RoiExtractor ex(cfg, store, "bench", rng);
    for (int R : rois) {
      if (R < 0) throw ConfigError("bench RoI counts must be >= 0");
      std::vector<RoiBox> boxes;
      SeededRng brng = SeededRng(seed).fork(static_cast<std::uint64_t>(R));
      for (int i = 0; i < R; ++i) {
        const double w = std::exp(brng.uniform(std::log(8.0), std::log(96.0)));
        const double h = std::exp(brng.uniform(std::log(8.0), std::log(96.0)));
        const double x = brng.uniform(0.0, kImage - w), y = brng.uniform(0.0, kImage - h);
        boxes.push_back(RoiBox{0, x, y, x + w, y + h});
      }
      BenchRow row;
      row.strategy = cfg.label();
      row.rois = R;
      row.seconds = std::numeric_limits<double>::infinity();
      for (int rep = 0; rep < repeats; ++rep) {
        Tape tape;
        FeaturePyramid p;
        for (const auto& l : levels) p.levels.push_back(tape.constant(l));
        SeededRng draw(seed);
        const auto t0 = std::chrono::steady_clock::now();
        ex.extract(tape, p, boxes, draw);
        row.seconds = std::min(row.seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        row.flops = tape.flops();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-32s %6s %14s %12s %12s\n", "strategy", "rois", "MACs", "ms", "ms/roi");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-32s %6d %14lld %12.3f %12.4f\n", r.strategy.c_str(), r.rois,
                  static_cast<long long>(r.flops), r.seconds * 1e3, r.rois > 0 ? r.seconds * 1e3 / r.rois : 0.0);
    out += buf;
  }
  return out;
}

}  // namespace groie::harness
