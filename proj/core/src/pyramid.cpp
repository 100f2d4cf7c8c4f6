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

#include "groie/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "groie/errors.hpp"

namespace groie {

double box_iou(const RoiBox& a, const RoiBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

void validate_box(const RoiBox& box, double image_w, double image_h) {
  if (!(box.x2 > box.x1) || !(box.y2 > box.y1)) {
    throw InputError("degenerate box (" + std::to_string(box.x1) + "," + std::to_string(box.y1) +
                     ")-(" + std::to_string(box.x2) + "," + std::to_string(box.y2) + ")");
  }
  if (box.x2 <= 0.0 || box.y2 <= 0.0 || box.x1 >= image_w || box.y1 >= image_h) {
    throw InputError("box does not intersect the image");
  }
}

void AssignConfig::validate() const {
  if (!(k_min <= k0 && k0 <= k_max)) {
    throw ConfigError("assign config requires k_min <= k0 <= k_max");
  }
  if (!(canonical_size > 0.0)) throw ConfigError("canonical size must be positive");
}

double level_score(const RoiBox& box, const AssignConfig& cfg) {
  const double w = box.width(), h = box.height();
  if (!(w > 0.0) || !(h > 0.0)) throw InputError("assign_level: degenerate box");
  return cfg.k0 + std::log2(std::sqrt(w * h) / cfg.canonical_size);
}

int unclamped_level(const RoiBox& box, const AssignConfig& cfg) {
  return static_cast<int>(std::floor(level_score(box, cfg)));
}

int assign_level(const RoiBox& box, const AssignConfig& cfg) {
  return std::clamp(unclamped_level(box, cfg), cfg.k_min, cfg.k_max);
}

int random_level(SeededRng& rng, const AssignConfig& cfg) {
  if (cfg.k_min > cfg.k_max) throw ConfigError("random_level: k_min > k_max");
  return static_cast<int>(rng.uniform_int(cfg.k_min, cfg.k_max));
}

const Var& FeaturePyramid::level(int k) const {
  if (k < min_level || k > max_level()) {
    throw InputError("pyramid has no level " + std::to_string(k));
  }
  return levels[static_cast<std::size_t>(k - min_level)];
}

std::int64_t FeaturePyramid::channels() const {
  if (levels.empty()) throw InputError("empty pyramid");
  return levels.front().dim(1);
}

std::int64_t FeaturePyramid::batch() const {
  if (levels.empty()) throw InputError("empty pyramid");
  return levels.front().dim(0);
}

void FeaturePyramid::validate(std::int64_t image_h, std::int64_t image_w) const {
  if (levels.empty()) throw InputError("empty pyramid");
  const auto n = batch();
  const auto c = channels();
  for (int k = min_level; k <= max_level(); ++k) {
    const Shape& s = level(k).shape();
    if (s.size() != 4 || s[0] != n || s[1] != c) {
      throw DimensionError("pyramid level " + std::to_string(k) + " has shape " + shape_str(s));
    }
    const std::int64_t st = stride(k);
    if (s[2] != (image_h + st - 1) / st || s[3] != (image_w + st - 1) / st) {
      throw DimensionError("pyramid level " + std::to_string(k) + " extent " + shape_str(s) +
                           " does not match stride " + std::to_string(st));
    }
  }
}

}  // namespace groie
