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
#include <span>
#include <vector>

#include "groie/autograd.hpp"
#include "groie/extractor.hpp"
#include "groie/harness/metrics.hpp"
#include "groie/harness/proposals.hpp"
#include "groie/harness/scene.hpp"

namespace groie::harness {

struct ModelConfig {
  // Strategy shared by both RoI paths; `channels` is the pyramid width and
  // `out_size` the box-path grid. The mask path reuses it at mask_roi_size.
  ExtractorConfig extractor;
  int mask_roi_size = 14;
  int fc_dim = 128;
  int mask_hidden = 16;
  std::array<std::int64_t, 5> stage_channels{16, 32, 64, 64, 64};  // stem, C2..C5

  void validate() const;
};

// Per-batch supervision assembled from scenes and their proposals.
struct TrainTargets {
  std::vector<RoiBox> boxes;             // every proposal, batch_idx set
  std::vector<int> labels;               // per proposal
  std::vector<std::int64_t> positives;   // rows of `boxes` with label > 0
  Tensor deltas;                         // [P, 4] regression targets for `positives`
  std::vector<RoiBox> mask_boxes;        // subset of positives
  Tensor masks;                          // [Pm, 1, 2S, 2S] binary targets
};

// Labels, regression targets and (at most `max_masks_per_image` randomly
// chosen) mask targets. proposals[i] belongs to scenes[i].
TrainTargets build_targets(std::span<const Scene* const> scenes,
                           std::span<const std::vector<Proposal>> proposals, int mask_size,
                           int max_masks_per_image, SeededRng& rng);

// [N,3,H,W] with 0.5 subtracted.
Tensor stack_images(std::span<const Scene* const> scenes);

struct LossTerms {
  Var cls;
  Var box;
  Var mask;
  Var total;
};

struct DetectConfig {
  double score_floor = 0.05;
  double nms_iou = 0.5;
  int max_detections = 100;
  bool masks = true;
};

// Backbone (stride-2 3x3 conv stack) -> top-down pyramid P2..P5 -> box path
// (extractor at S, two FC layers, class logits and class-agnostic deltas) and
// mask path (extractor at mask_roi_size, two 3x3 convs, 2x upsample, 1x1,
// sigmoid).
class ToyModel {
 public:
  ToyModel(const ModelConfig& config, SeededRng& rng);
  ToyModel(const ToyModel&) = delete;
  ToyModel& operator=(const ToyModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  FeaturePyramid features(Tape& tape, const Tensor& images) const;

  struct BoxOutput {
    Var logits;  // [R, K+1]
    Var deltas;  // [R, 4]
  };
  BoxOutput box_head(Tape& tape, const FeaturePyramid& pyramid, std::span<const RoiBox> boxes,
                     SeededRng& rng) const;
  // Mask probabilities [R, 1, 2S, 2S].
  Var mask_head(Tape& tape, const FeaturePyramid& pyramid, std::span<const RoiBox> boxes, SeededRng& rng) const;

  LossTerms losses(Tape& tape, const FeaturePyramid& pyramid, const TrainTargets& targets, SeededRng& rng) const;

  // Scores every proposal of one image, decodes boxes, runs per-class NMS and
  // keeps the top max_detections. Detections carry `image_index`.
  std::vector<Detection> detect(const Scene& scene, std::span<const Proposal> proposals, SeededRng& rng,
                                int image_index, const DetectConfig& cfg = {}) const;

  int mask_size() const { return 2 * config_.mask_roi_size; }

 private:
  struct Conv {
    Parameter* w;
    Parameter* b;
  };
  Conv conv(const std::string& name, std::int64_t cin, std::int64_t cout, int k, SeededRng& rng);
  static Var apply(Tape& tape, const Conv& c, Var x, int stride);

  ModelConfig config_;
  ParamStore store_;
  std::array<Conv, 5> stages_{};
  std::array<Conv, 4> laterals_{};
  RoiExtractor box_extractor_;
  RoiExtractor mask_extractor_;
  Parameter *fc1_w_, *fc1_b_, *fc2_w_, *fc2_b_, *cls_w_, *cls_b_, *reg_w_, *reg_b_;
  Conv mask1_{}, mask2_{}, mask_out_{};
};

}  // namespace groie::harness
