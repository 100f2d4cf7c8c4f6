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

#include "groie/harness/proposals.hpp"

#include <algorithm>
#include <cmath>

#include "groie/errors.hpp"

namespace groie::harness {

void ProposalConfig::validate() const {
  if (jitter_per_object < 0 || negatives < 0) throw ConfigError("proposal counts must be >= 0");
  if (!(min_scale > 0.0) || max_scale < min_scale) throw ConfigError("bad jitter scale range");
  if (shift < 0.0) throw ConfigError("jitter shift must be >= 0");
  if (!(negative_min_size >= 1.0) || negative_max_size < negative_min_size) {
    throw ConfigError("bad negative size range");
  }
  if (!(positive_iou > 0.0 && positive_iou <= 1.0)) throw ConfigError("positive_iou must lie in (0, 1]");
}

RoiBox clip_box(const RoiBox& box, double width, double height) {
  RoiBox b = box;
  b.x1 = std::clamp(b.x1, 0.0, width - 1.0);
  b.y1 = std::clamp(b.y1, 0.0, height - 1.0);
  b.x2 = std::clamp(b.x2, b.x1 + 1.0, width);
  b.y2 = std::clamp(b.y2, b.y1 + 1.0, height);
  return b;
}

namespace {

Proposal label(const RoiBox& box, const GroundTruth& gt, double positive_iou) {
  Proposal p;
  p.box = box;
  for (std::size_t i = 0; i < gt.objects.size(); ++i) {
    const double iou = box_iou(box, gt.objects[i].box);
    if (p.gt_index < 0 || iou > p.iou) {
      p.iou = iou;
      p.gt_index = static_cast<int>(i);
    }
  }
  if (p.gt_index >= 0 && p.iou >= positive_iou) p.label = gt.objects[static_cast<std::size_t>(p.gt_index)].cls;
  return p;
}

}  // namespace

std::vector<Proposal> make_proposals(const GroundTruth& gt, SeededRng& rng, const ProposalConfig& cfg,
                                     std::int64_t batch_idx) {
  cfg.validate();
  const double W = gt.width, H = gt.height;
  std::vector<Proposal> out;
  const double ls0 = std::log(cfg.min_scale), ls1 = std::log(cfg.max_scale);
  for (const auto& obj : gt.objects) {
    const double w = obj.box.width(), h = obj.box.height();
    const double cx = obj.box.x1 + w / 2, cy = obj.box.y1 + h / 2;
    for (int j = 0; j < cfg.jitter_per_object; ++j) {
      const double nw = w * std::exp(rng.uniform(ls0, ls1)), nh = h * std::exp(rng.uniform(ls0, ls1));
      const double ncx = cx + rng.uniform(-cfg.shift, cfg.shift) * w;
      const double ncy = cy + rng.uniform(-cfg.shift, cfg.shift) * h;
      RoiBox b = clip_box(RoiBox{batch_idx, ncx - nw / 2, ncy - nh / 2, ncx + nw / 2, ncy + nh / 2}, W, H);
      out.push_back(label(b, gt, cfg.positive_iou));
    }
  }
  const double ln0 = std::log(cfg.negative_min_size);
  const double ln1 = std::log(std::min({cfg.negative_max_size, W, H}));
  for (int j = 0; j < cfg.negatives; ++j) {
    const double w = std::exp(rng.uniform(ln0, std::max(ln0, ln1)));
    const double h = std::exp(rng.uniform(ln0, std::max(ln0, ln1)));
    const double x = rng.uniform(0.0, std::max(0.0, W - w)), y = rng.uniform(0.0, std::max(0.0, H - h));
    out.push_back(label(clip_box(RoiBox{batch_idx, x, y, x + w, y + h}, W, H), gt, cfg.positive_iou));
  }
  return out;
}

std::array<double, 4> encode_deltas(const RoiBox& p, const RoiBox& t) {
  const double pw = p.width(), ph = p.height();
  const double pcx = p.x1 + 0.5 * pw, pcy = p.y1 + 0.5 * ph;
  const double tw = t.width(), th = t.height();
  const double tcx = t.x1 + 0.5 * tw, tcy = t.y1 + 0.5 * th;
  return {(tcx - pcx) / pw / kDeltaStd[0], (tcy - pcy) / ph / kDeltaStd[1], std::log(tw / pw) / kDeltaStd[2],
          std::log(th / ph) / kDeltaStd[3]};
}

RoiBox decode_deltas(const RoiBox& p, const double* d) {
  const double clip = std::log(1000.0 / 16.0);
  const double pw = p.width(), ph = p.height();
  const double pcx = p.x1 + 0.5 * pw, pcy = p.y1 + 0.5 * ph;
  const double cx = pcx + d[0] * kDeltaStd[0] * pw, cy = pcy + d[1] * kDeltaStd[1] * ph;
  const double w = pw * std::exp(std::clamp(d[2] * kDeltaStd[2], -clip, clip));
  const double h = ph * std::exp(std::clamp(d[3] * kDeltaStd[3], -clip, clip));
  return RoiBox{p.batch_idx, cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

Tensor mask_target(const Mask& mask, int height, int width, const RoiBox& box, int size) {
  if (mask.size() != static_cast<std::size_t>(height) * width) throw DimensionError("mask_target: bad mask size");
  if (size < 1) throw ConfigError("mask_target: size must be >= 1");
  Tensor out(Shape{size, size});
  auto at = [&](int i, int j) -> double {
    if (i < 0 || i >= height || j < 0 || j >= width) return 0.0;
    return mask[static_cast<std::size_t>(i) * width + j];
  };
  const double bw = box.width() / size, bh = box.height() / size;
  for (int a = 0; a < size; ++a) {
    // continuous pixel-index coordinate of the sub-cell centre
    const double y = box.y1 + (a + 0.5) * bh - 0.5;
    const int y0 = static_cast<int>(std::floor(y));
    const double ly = y - y0;
    for (int b = 0; b < size; ++b) {
      const double x = box.x1 + (b + 0.5) * bw - 0.5;
      const int x0 = static_cast<int>(std::floor(x));
      const double lx = x - x0;
      const double v = (1 - ly) * ((1 - lx) * at(y0, x0) + lx * at(y0, x0 + 1)) +
                       ly * ((1 - lx) * at(y0 + 1, x0) + lx * at(y0 + 1, x0 + 1));
      out[a * size + b] = v >= 0.5 ? 1.0 : 0.0;
    }
  }
  return out;
}

Mask paste_mask(const double* probs, int size, const RoiBox& box, int height, int width, double threshold) {
  Mask out(static_cast<std::size_t>(height) * width, 0);
  const double bw = box.width(), bh = box.height();
  if (!(bw > 0.0) || !(bh > 0.0)) return out;
  const int i0 = std::max(0, static_cast<int>(std::floor(box.y1)));
  const int i1 = std::min(height, static_cast<int>(std::ceil(box.y2)));
  const int j0 = std::max(0, static_cast<int>(std::floor(box.x1)));
  const int j1 = std::min(width, static_cast<int>(std::ceil(box.x2)));
  auto at = [&](int a, int b) {
    a = std::clamp(a, 0, size - 1);
    b = std::clamp(b, 0, size - 1);
    return probs[a * size + b];
  };
  for (int i = i0; i < i1; ++i) {
    const double py = i + 0.5;
    if (py < box.y1 || py > box.y2) continue;
    const double u = (py - box.y1) / bh * size - 0.5;
    const int a0 = static_cast<int>(std::floor(u));
    const double la = u - a0;
    for (int j = j0; j < j1; ++j) {
      const double px = j + 0.5;
      if (px < box.x1 || px > box.x2) continue;
      const double v = (px - box.x1) / bw * size - 0.5;
      const int b0 = static_cast<int>(std::floor(v));
      const double lb = v - b0;
      const double p = (1 - la) * ((1 - lb) * at(a0, b0) + lb * at(a0, b0 + 1)) +
                       la * ((1 - lb) * at(a0 + 1, b0) + lb * at(a0 + 1, b0 + 1));
      if (p >= threshold) out[static_cast<std::size_t>(i) * width + j] = 1;
    }
  }
  return out;
}

}  // namespace groie::harness
