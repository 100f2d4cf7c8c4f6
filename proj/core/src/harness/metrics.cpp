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

#include "groie/harness/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "groie/errors.hpp"

namespace groie::harness {

double mask_iou(const Mask& a, const Mask& b) {
  if (a.size() != b.size()) throw DimensionError("mask_iou: mask sizes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] & b[i]);
    uni += (a[i] | b[i]);
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double compute_ap(std::span<const Detection> predictions, std::span<const GtInstance> gts, double iou_threshold,
                  IouType type) {
  if (gts.empty()) return 0.0;
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return predictions[a].score > predictions[b].score; });

  std::vector<bool> taken(gts.size(), false);
  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t n = 0; n < order.size(); ++n) {
    const Detection& d = predictions[order[n]];
    double best = iou_threshold;
    std::ptrdiff_t match = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].image != d.image) continue;
      const double iou = type == IouType::Box ? box_iou(d.box, gts[g].box) : mask_iou(d.mask, gts[g].mask);
      if (iou >= best) {
        best = iou;
        match = static_cast<std::ptrdiff_t>(g);
      }
    }
    if (match >= 0) {
      taken[static_cast<std::size_t>(match)] = true;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(n + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double total = 0.0;
  std::size_t k = 0;
  for (int r = 0; r <= 100; ++r) {
    const double level = r / 100.0;
    while (k < recall.size() && recall[k] < level) ++k;
    if (k < recall.size()) total += precision[k];
  }
  return total / 101.0;
}

std::vector<std::size_t> nms(std::span<const RoiBox> boxes, std::span<const double> scores, double iou_threshold) {
  if (boxes.size() != scores.size()) throw DimensionError("nms: boxes and scores differ in length");
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> keep;
  for (std::size_t i : order) {
    bool ok = true;
    for (std::size_t j : keep) {
      if (box_iou(boxes[i], boxes[j]) > iou_threshold) {
        ok = false;
        break;
      }
    }
    if (ok) keep.push_back(i);
  }
  return keep;
}

ApSummary summarize(std::span<const Detection> dets, std::span<const GtInstance> gts, bool with_masks) {
  ApSummary s;
  s.per_class_box_50.assign(kNumClasses, -1.0);
  int present = 0;
  for (int c = 1; c <= kNumClasses; ++c) {
    std::vector<Detection> d;
    std::vector<GtInstance> g;
    for (const auto& x : dets)
      if (x.cls == c) d.push_back(x);
    for (const auto& x : gts)
      if (x.cls == c) g.push_back(x);
    if (g.empty()) continue;
    ++present;
    const double ap50 = compute_ap(d, g, 0.5);
    s.per_class_box_50[static_cast<std::size_t>(c - 1)] = ap50;
    s.ap_box_50 += ap50;
    s.ap_box_75 += compute_ap(d, g, 0.75);
    if (with_masks) s.ap_mask_50 += compute_ap(d, g, 0.5, IouType::Mask);
  }
  if (present > 0) {
    s.ap_box_50 /= present;
    s.ap_box_75 /= present;
    s.ap_mask_50 /= present;
  }
  return s;
}

}  // namespace groie::harness
