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

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "groie/harness/config.hpp"
#include "groie/harness/train.hpp"

namespace groie::harness {

struct CompareRow {
  std::string strategy;  // extractor label
  std::uint64_t seed = 0;
  double ap_box_50 = 0.0;
  double ap_box_75 = 0.0;
  double ap_mask_50 = 0.0;
  double seconds = 0.0;
};

struct CompareSummary {
  std::string strategy;
  int runs = 0;
  double mean_box_50 = 0.0, std_box_50 = 0.0;
  double mean_box_75 = 0.0, std_box_75 = 0.0;
  double mean_mask_50 = 0.0, std_mask_50 = 0.0;
};

// Trains `base` once per (strategy, seed), in that nesting order. Strategy
// strings follow parse_extractor_spec.
std::vector<CompareRow> compare(const RunConfig& base, const std::vector<std::string>& strategies,
                                const std::vector<std::uint64_t>& seeds, std::ostream* log = nullptr);

// Per-strategy mean and sample standard deviation, in first-seen order.
std::vector<CompareSummary> summarize_compare(const std::vector<CompareRow>& rows);

// "strategy,seed,ap_box_50,ap_box_75,ap_mask_50,seconds" followed by one row
// per run.
std::string compare_csv(const std::vector<CompareRow>& rows);
// Fixed-width table: one strategy per row, mean +- std of each AP column.
std::string compare_table(const std::vector<CompareSummary>& summary);

struct BenchRow {
  std::string strategy;
  int rois = 0;
  std::int64_t flops = 0;  // multiply-accumulates recorded on the tape
  double seconds = 0.0;    // best of `repeats` forward passes
};

// Forward-only extraction on a random pyramid for a 128 x 128 image.
std::vector<BenchRow> bench_extractors(const std::vector<std::string>& strategies, const std::vector<int>& rois,
                                       std::int64_t channels = 64, int out_size = 7, int repeats = 3,
                                       std::uint64_t seed = 0);

std::string bench_table(const std::vector<BenchRow>& rows);

}  // namespace groie::harness
