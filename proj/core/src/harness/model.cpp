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

#include "groie/harness/model.hpp"

#include <algorithm>
#include <cmath>

#include "groie/errors.hpp"
#include "groie/ops.hpp"

namespace groie::harness {

void ModelConfig::validate() const {
  extractor.validate();
  if (mask_roi_size < 1) throw ConfigError("mask_roi_size must be >= 1");
  if (fc_dim < 1 || mask_hidden < 1) throw ConfigError("head widths must be >= 1");
  for (auto c : stage_channels)
    if (c < 1) throw ConfigError("stage channels must be >= 1");
  const auto& a = extractor.assign;
  if (a.k_min != 2 || a.k_max != 5) throw ConfigError("the toy backbone emits levels 2..5 only");
}

namespace {

ExtractorConfig mask_path(const ExtractorConfig& box, int size) {
  ExtractorConfig c = box;
  c.out_size = size;
  return c;
}

Var scalar_zero(Tape& tape) { return tape.constant(Tensor::scalar(0.0)); }

}  // namespace

ToyModel::Conv ToyModel::conv(const std::string& name, std::int64_t cin, std::int64_t cout, int k,
                              SeededRng& rng) {
  const std::int64_t fan_in = cin * k * k, fan_out = cout * k * k;
  Conv c;
  c.w = &store_.add_xavier(name + ".weight", Shape{cout, cin, k, k}, fan_in, fan_out, rng);
  c.b = &store_.add_zeros(name + ".bias", Shape{cout});
  return c;
}

Var ToyModel::apply(Tape& tape, const Conv& c, Var x, int stride) {
  return conv2d(x, tape.param(*c.w), tape.param(*c.b), stride, static_cast<int>(c.w->value.dim(2) / 2));
}

ToyModel::ToyModel(const ModelConfig& config, SeededRng& rng)
    : config_((config.validate(), config)),
      box_extractor_(config.extractor, store_, "box_roi", rng),
      mask_extractor_(mask_path(config.extractor, config.mask_roi_size), store_, "mask_roi", rng) {
  const auto& sc = config_.stage_channels;
  const std::int64_t C = config_.extractor.channels;
  std::int64_t cin = 3;
  for (std::size_t i = 0; i < sc.size(); ++i) {
    stages_[i] = conv("backbone.stage" + std::to_string(i), cin, sc[i], 3, rng);
    cin = sc[i];
  }
  for (std::size_t k = 0; k < laterals_.size(); ++k) {
    laterals_[k] = conv("fpn.lateral" + std::to_string(k + 2), sc[k + 1], C, 1, rng);
  }
  const int S = config_.extractor.out_size;
  const std::int64_t flat = C * S * S, F = config_.fc_dim;
  fc1_w_ = &store_.add_xavier("box_head.fc1.weight", Shape{flat, F}, flat, F, rng);
  fc1_b_ = &store_.add_zeros("box_head.fc1.bias", Shape{F});
  fc2_w_ = &store_.add_xavier("box_head.fc2.weight", Shape{F, F}, F, F, rng);
  fc2_b_ = &store_.add_zeros("box_head.fc2.bias", Shape{F});
  cls_w_ = &store_.add_xavier("box_head.cls.weight", Shape{F, kNumClasses + 1}, F, kNumClasses + 1, rng);
  cls_b_ = &store_.add_zeros("box_head.cls.bias", Shape{kNumClasses + 1});
  reg_w_ = &store_.add_xavier("box_head.reg.weight", Shape{F, 4}, F, 4, rng);
  reg_b_ = &store_.add_zeros("box_head.reg.bias", Shape{4});
  mask1_ = conv("mask_head.conv1", C, config_.mask_hidden, 3, rng);
  mask2_ = conv("mask_head.conv2", config_.mask_hidden, config_.mask_hidden, 3, rng);
  mask_out_ = conv("mask_head.logits", config_.mask_hidden, 1, 1, rng);
}

FeaturePyramid ToyModel::features(Tape& tape, const Tensor& images) const {
  if (images.rank() != 4 || images.dim(1) != 3) {
    throw DimensionError("features: expected [N,3,H,W], got " + shape_str(images.shape()));
  }
  if (images.dim(2) % 32 != 0 || images.dim(3) % 32 != 0) {
    throw DimensionError("features: image sides must be multiples of 32");
  }
  std::array<Var, 4> c{};
  Var x = relu(apply(tape, stages_[0], tape.constant(images), 2));
  for (std::size_t i = 1; i < stages_.size(); ++i) {
    x = relu(apply(tape, stages_[i], x, 2));
    c[i - 1] = x;
  }
  FeaturePyramid p;
  p.min_level = 2;
  p.levels.resize(4);
  p.levels[3] = apply(tape, laterals_[3], c[3], 1);
  for (int k = 2; k >= 0; --k) {
    p.levels[static_cast<std::size_t>(k)] =
        add(apply(tape, laterals_[static_cast<std::size_t>(k)], c[static_cast<std::size_t>(k)], 1),
            upsample_nearest2x(p.levels[static_cast<std::size_t>(k + 1)]));
  }
  return p;
}

ToyModel::BoxOutput ToyModel::box_head(Tape& tape, const FeaturePyramid& pyramid, std::span<const RoiBox> boxes,
                                       SeededRng& rng) const {
  Var f = box_extractor_.extract(tape, pyramid, boxes, rng).features;
  const std::int64_t R = f.dim(0);
  f = reshape(f, Shape{R, f.dim(1) * f.dim(2) * f.dim(3)});
  Var h = relu(linear(f, tape.param(*fc1_w_), tape.param(*fc1_b_)));
  h = relu(linear(h, tape.param(*fc2_w_), tape.param(*fc2_b_)));
  return {linear(h, tape.param(*cls_w_), tape.param(*cls_b_)), linear(h, tape.param(*reg_w_), tape.param(*reg_b_))};
}

Var ToyModel::mask_head(Tape& tape, const FeaturePyramid& pyramid, std::span<const RoiBox> boxes,
                        SeededRng& rng) const {
  Var f = mask_extractor_.extract(tape, pyramid, boxes, rng).features;
  Var h = relu(apply(tape, mask1_, f, 1));
  h = relu(apply(tape, mask2_, h, 1));
  return sigmoid(apply(tape, mask_out_, upsample_nearest2x(h), 1));
}

LossTerms ToyModel::losses(Tape& tape, const FeaturePyramid& pyramid, const TrainTargets& t,
                           SeededRng& rng) const {
  LossTerms out;
  BoxOutput head = box_head(tape, pyramid, t.boxes, rng);
  out.cls = cross_entropy(head.logits, t.labels);
  out.box = t.positives.empty() ? scalar_zero(tape)
                                : smooth_l1(select_rows(head.deltas, t.positives), t.deltas);
  out.mask = t.mask_boxes.empty() ? scalar_zero(tape) : bce(mask_head(tape, pyramid, t.mask_boxes, rng), t.masks);
  out.total = add(add(out.cls, out.box), out.mask);
  return out;
}

Tensor stack_images(std::span<const Scene* const> scenes) {
  if (scenes.empty()) throw InputError("stack_images: no scenes");
  const Shape& s = scenes.front()->image.shape();
  const std::int64_t n = static_cast<std::int64_t>(scenes.size()), per = numel_of(s);
  Tensor out(Shape{n, s[0], s[1], s[2]});
  for (std::int64_t i = 0; i < n; ++i) {
    const Tensor& img = scenes[static_cast<std::size_t>(i)]->image;
    if (img.shape() != s) throw DimensionError("stack_images: scenes differ in size");
    for (std::int64_t j = 0; j < per; ++j) out[i * per + j] = img[j] - 0.5;
  }
  return out;
}

TrainTargets build_targets(std::span<const Scene* const> scenes, std::span<const std::vector<Proposal>> proposals,
                           int mask_size, int max_masks_per_image, SeededRng& rng) {
  if (scenes.size() != proposals.size()) throw InputError("build_targets: one proposal list per scene");
  TrainTargets t;
  std::vector<double> deltas, masks;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const GroundTruth& gt = scenes[i]->gt;
    std::vector<std::size_t> pos_here;  // proposal indices within this scene
    for (std::size_t j = 0; j < proposals[i].size(); ++j) {
      const Proposal& p = proposals[i][j];
      RoiBox b = p.box;
      b.batch_idx = static_cast<std::int64_t>(i);
      if (p.label > 0) {
        const auto d = encode_deltas(b, gt.objects[static_cast<std::size_t>(p.gt_index)].box);
        deltas.insert(deltas.end(), d.begin(), d.end());
        t.positives.push_back(static_cast<std::int64_t>(t.boxes.size()));
        pos_here.push_back(j);
      }
      t.boxes.push_back(b);
      t.labels.push_back(p.label);
    }
    // partial Fisher-Yates: a uniform subset of the positives gets mask supervision
    const std::size_t take = std::min(pos_here.size(), static_cast<std::size_t>(std::max(max_masks_per_image, 0)));
    for (std::size_t k = 0; k < take; ++k) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(k), static_cast<std::int64_t>(pos_here.size()) - 1));
      std::swap(pos_here[k], pos_here[j]);
    }
    std::sort(pos_here.begin(), pos_here.begin() + static_cast<std::ptrdiff_t>(take));
    for (std::size_t k = 0; k < take; ++k) {
      const Proposal& p = proposals[i][pos_here[k]];
      RoiBox b = p.box;
      b.batch_idx = static_cast<std::int64_t>(i);
      const Tensor m =
          mask_target(gt.objects[static_cast<std::size_t>(p.gt_index)].mask, gt.height, gt.width, b, mask_size);
      masks.insert(masks.end(), m.data().begin(), m.data().end());
      t.mask_boxes.push_back(b);
    }
  }
  const auto P = static_cast<std::int64_t>(t.positives.size());
  t.deltas = Tensor(Shape{P, 4}, std::move(deltas));
  const auto Pm = static_cast<std::int64_t>(t.mask_boxes.size());
  t.masks = Tensor(Shape{Pm, 1, mask_size, mask_size}, std::move(masks));
  return t;
}

std::vector<Detection> ToyModel::detect(const Scene& scene, std::span<const Proposal> proposals, SeededRng& rng,
                                        int image_index, const DetectConfig& cfg) const {
  std::vector<Detection> dets;
  if (proposals.empty()) return dets;
  const int H = scene.gt.height, W = scene.gt.width;
  Tape tape;
  const Scene* one[] = {&scene};
  FeaturePyramid pyr = features(tape, stack_images(one));
  std::vector<RoiBox> boxes;
  for (const auto& p : proposals) {
    RoiBox b = p.box;
    b.batch_idx = 0;
    boxes.push_back(b);
  }
  BoxOutput head = box_head(tape, pyr, boxes, rng);
  const Tensor& prob = softmax(head.logits, 1).value();
  const Tensor& delta = head.deltas.value();
  const std::int64_t K = kNumClasses + 1;

  std::vector<RoiBox> decoded;
  for (std::size_t r = 0; r < boxes.size(); ++r) {
    decoded.push_back(clip_box(decode_deltas(boxes[r], delta.ptr() + r * 4), W, H));
  }
  for (int c = 1; c <= kNumClasses; ++c) {
    std::vector<RoiBox> cb;
    std::vector<double> cs;
    for (std::size_t r = 0; r < boxes.size(); ++r) {
      const double s = prob[static_cast<std::int64_t>(r) * K + c];
      if (s < cfg.score_floor) continue;
      cb.push_back(decoded[r]);
      cs.push_back(s);
    }
    for (std::size_t k : nms(cb, cs, cfg.nms_iou)) {
      Detection d;
      d.image = image_index;
      d.cls = c;
      d.score = cs[k];
      d.box = cb[k];
      dets.push_back(std::move(d));
    }
  }
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
  if (dets.size() > static_cast<std::size_t>(cfg.max_detections)) dets.resize(static_cast<std::size_t>(cfg.max_detections));

  if (cfg.masks && !dets.empty()) {
    std::vector<RoiBox> mb;
    for (const auto& d : dets) mb.push_back(d.box);
    const Tensor& probs = mask_head(tape, pyr, mb, rng).value();
    const int M = mask_size();
    for (std::size_t i = 0; i < dets.size(); ++i) {
      dets[i].mask = paste_mask(probs.ptr() + i * static_cast<std::size_t>(M * M), M, dets[i].box, H, W);
    }
  }
  return dets;
}

}  // namespace groie::harness
