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

#include <array>
#include <cstdint>
#include <vector>

#include "groie/harness/scene.hpp"
#include "groie/pyramid.hpp"
#include "groie/rng.hpp"
#include "groie/tensor.hpp"

namespace groie::harness {

// Stand-in for a region proposal network: jittered copies of the ground truth
// plus random boxes.
struct ProposalConfig {
  int jitter_per_object = 4;
  double min_scale = 0.8;   // per-axis size factor, log-uniform in [min_scale, max_scale]
  double max_scale = 1.25;
  double shift = 0.1;       // centre shift, uniform in +-shift * size per axis
  int negatives = 8;
  double negative_min_size = 8.0;
  double negative_max_size = 96.0;
  double positive_iou = 0.5;

  void validate() const;
};

struct Proposal {
  RoiBox box;
  int label = kBackground;  // class of the best-matching object, or background
  int gt_index = -1;        // best-matching object (by IoU), -1 when gt is empty
  double iou = 0.0;
};

// jitter_per_object copies per object (object order), then `negatives`
// random boxes. Every box is clipped to the image and keeps at least one
// pixel of extent. All boxes carry `batch_idx`.
std::vector<Proposal> make_proposals(const GroundTruth& gt, SeededRng& rng, const ProposalConfig& cfg,
                                     std::int64_t batch_idx = 0);

RoiBox clip_box(const RoiBox& box, double width, double height);

// Regression targets are (dx, dy, dw, dh) divided by these.
inline constexpr std::array<double, 4> kDeltaStd{0.1, 0.1, 0.2, 0.2};

std::array<double, 4> encode_deltas(const RoiBox& proposal, const RoiBox& target);
// Inverse of encode_deltas; dw, dh are clamped to +-log(1000/16) first.
RoiBox decode_deltas(const RoiBox& proposal, const double* deltas);

// The object's mask cropped to `box` and resampled to size x size by bilinear
// interpolation at sub-cell centres, then thresholded at 0.5. [size, size].
Tensor mask_target(const Mask& mask, int height, int width, const RoiBox& box, int size = 28);

// Pastes a size x size probability map into `box` on an H x W canvas and
// binarises it at `threshold`. Pixels outside the box are 0.
Mask paste_mask(const double* probs, int size, const RoiBox& box, int height, int width,
                double threshold = 0.5);

}  // namespace groie::harness
