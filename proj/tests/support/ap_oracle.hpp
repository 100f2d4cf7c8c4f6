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

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "groie/harness/metrics.hpp"
#include "groie/pyramid.hpp"

namespace groie::testing {

// AP by sweeping every score threshold: for each prefix of the score-sorted
// predictions the greedy matching is redone from scratch, and p(r) is the best
// precision among prefixes whose recall reaches r. Recall comparisons are done
// in integers. Scores are assumed distinct.
inline double ap_threshold_sweep(std::span<const harness::Detection> preds, std::span<const harness::GtInstance> gts,
                                 double iou_threshold) {
  const std::size_t G = gts.size();
  if (G == 0) return 0.0;
  std::vector<std::size_t> order(preds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return preds[a].score > preds[b].score; });

  std::vector<std::size_t> tps(order.size() + 1, 0);
  for (std::size_t k = 1; k <= order.size(); ++k) {
    std::vector<char> used(G, 0);
    std::size_t tp = 0;
    for (std::size_t n = 0; n < k; ++n) {
      const auto& d = preds[order[n]];
      double best = -1.0;
      std::size_t pick = G;
      for (std::size_t g = 0; g < G; ++g) {
        if (used[g] || gts[g].image != d.image) continue;
        const double iou = box_iou(d.box, gts[g].box);
        if (iou >= iou_threshold && iou > best) best = iou, pick = g;
      }
      if (pick < G) used[pick] = 1, ++tp;
    }
    tps[k] = tp;
  }
  double total = 0.0;
  for (std::size_t r = 0; r <= 100; ++r) {
    double p = 0.0;
    for (std::size_t k = 1; k <= order.size(); ++k)
      if (tps[k] * 100 >= r * G) p = std::max(p, static_cast<double>(tps[k]) / static_cast<double>(k));
    total += p;
  }
  return total / 101.0;
}

}  // namespace groie::testing
