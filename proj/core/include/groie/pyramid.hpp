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
#include <vector>

#include "groie/autograd.hpp"
#include "groie/rng.hpp"

namespace groie {

// Axis-aligned region in image pixel coordinates.
struct RoiBox {
  std::int64_t batch_idx = 0;
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  friend bool operator==(const RoiBox&, const RoiBox&) = default;
};

double box_iou(const RoiBox& a, const RoiBox& b);

// Throws InputError unless x2 > x1, y2 > y1 and the box overlaps the
// image_w x image_h rectangle.
void validate_box(const RoiBox& box, double image_w, double image_h);

struct AssignConfig {
  int k0 = 4;
  int k_min = 2;
  int k_max = 5;
  double canonical_size = 224.0;

  void validate() const;
};

// k0 + log2(sqrt(wh) / canonical_size) before flooring and clamping.
double level_score(const RoiBox& box, const AssignConfig& cfg);
// floor(level_score) without clamping.
int unclamped_level(const RoiBox& box, const AssignConfig& cfg);
// Pyramid level a box is pooled from, clamped to [k_min, k_max].
int assign_level(const RoiBox& box, const AssignConfig& cfg);

// Uniform draw from [k_min, k_max].
int random_level(SeededRng& rng, const AssignConfig& cfg);

// Multi-scale feature maps P_k, level k at stride 2^k, all sharing channels.
struct FeaturePyramid {
  std::vector<Var> levels;  // levels[i] holds level min_level + i, shape [N,C,H_k,W_k]
  int min_level = 2;

  int max_level() const { return min_level + static_cast<int>(levels.size()) - 1; }
  const Var& level(int k) const;
  static int stride(int k) { return 1 << k; }
  std::int64_t channels() const;
  std::int64_t batch() const;

  // Checks shared batch/channels and that level k spans ceil(image / 2^k).
  void validate(std::int64_t image_h, std::int64_t image_w) const;
};

}  // namespace groie
