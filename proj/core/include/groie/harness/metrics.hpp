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

#include <span>
#include <vector>

#include "groie/harness/scene.hpp"
#include "groie/pyramid.hpp"

namespace groie::harness {

struct Detection {
  int image = 0;
  int cls = kBackground;
  double score = 0.0;
  RoiBox box;
  Mask mask;  // image resolution; only needed for mask AP
};

struct GtInstance {
  int image = 0;
  int cls = kBackground;
  RoiBox box;
  Mask mask;
};

enum class IouType { Box, Mask };

// |a & b| / |a | b| over equally sized binary masks; 0 when both are empty.
double mask_iou(const Mask& a, const Mask& b);

// Average precision of one class. Predictions are visited by descending score
// (ties keep input order); each one is matched to the unmatched ground truth
// of the same image with the highest IoU, provided it reaches iou_threshold.
// Precision is made monotone from the right and sampled at the 101 recall
// points 0, 0.01, ..., 1. Returns 0 when gts is empty.
double compute_ap(std::span<const Detection> predictions, std::span<const GtInstance> gts, double iou_threshold,
                  IouType type = IouType::Box);

// Greedy non-maximum suppression; returns kept indices by descending score.
std::vector<std::size_t> nms(std::span<const RoiBox> boxes, std::span<const double> scores, double iou_threshold);

struct ApSummary {
  double ap_box_50 = 0.0;
  double ap_box_75 = 0.0;
  double ap_mask_50 = 0.0;
  std::vector<double> per_class_box_50;  // index cls - 1; -1 when the class has no ground truth
};

// Class-averaged AP over classes that have ground truth. Masks are only
// consulted when `with_masks`.
ApSummary summarize(std::span<const Detection> dets, std::span<const GtInstance> gts, bool with_masks = true);

}  // namespace groie::harness
