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

#include "groie/roi_align.hpp"

#include <string>
#include <vector>

#include "groie/errors.hpp"
#include "ops_internal.hpp"

namespace groie {

using namespace detail;

namespace {

// Bilinear tap of one sample: four flat offsets into an H x W plane.
struct Tap {
  std::int64_t i1, i2, i3, i4;
  double w1, w2, w3, w4;
  bool valid;
};

Tap make_tap(double y, double x, std::int64_t H, std::int64_t W) {
  Tap tap{0, 0, 0, 0, 0.0, 0.0, 0.0, 0.0, false};
  if (y < -1.0 || y > static_cast<double>(H) || x < -1.0 || x > static_cast<double>(W)) return tap;
  if (y <= 0) y = 0;
  if (x <= 0) x = 0;
  auto y_low = static_cast<std::int64_t>(y);
  auto x_low = static_cast<std::int64_t>(x);
  std::int64_t y_high, x_high;
  if (y_low >= H - 1) {
    y_high = y_low = H - 1;
    y = static_cast<double>(y_low);
  } else {
    y_high = y_low + 1;
  }
  if (x_low >= W - 1) {
    x_high = x_low = W - 1;
    x = static_cast<double>(x_low);
  } else {
    x_high = x_low + 1;
  }
  const double ly = y - static_cast<double>(y_low), lx = x - static_cast<double>(x_low);
  const double hy = 1.0 - ly, hx = 1.0 - lx;
  tap.i1 = y_low * W + x_low;
  tap.i2 = y_low * W + x_high;
  tap.i3 = y_high * W + x_low;
  tap.i4 = y_high * W + x_high;
  tap.w1 = hy * hx;
  tap.w2 = hy * lx;
  tap.w3 = ly * hx;
  tap.w4 = ly * lx;
  tap.valid = true;
  return tap;
}

// Taps for every (bin, sample) of one box, bin-major.
std::vector<Tap> box_taps(const RoiBox& b, const RoiAlignParams& p, std::int64_t H, std::int64_t W) {
  const int S = p.out_size, g = p.sampling_ratio;
  const double start_w = b.x1 * p.spatial_scale - 0.5;
  const double start_h = b.y1 * p.spatial_scale - 0.5;
  const double roi_w = (b.x2 - b.x1) * p.spatial_scale;
  const double roi_h = (b.y2 - b.y1) * p.spatial_scale;
  const double bin_w = roi_w / S, bin_h = roi_h / S;
  std::vector<Tap> taps;
  taps.reserve(static_cast<std::size_t>(S * S * g * g));
  for (int ph = 0; ph < S; ++ph) {
    for (int pw = 0; pw < S; ++pw) {
      for (int iy = 0; iy < g; ++iy) {
        const double y = start_h + ph * bin_h + (iy + 0.5) * bin_h / g;
        for (int ix = 0; ix < g; ++ix) {
          const double x = start_w + pw * bin_w + (ix + 0.5) * bin_w / g;
          taps.push_back(make_tap(y, x, H, W));
        }
      }
    }
  }
  return taps;
}

}  // namespace

Var roi_align(Var level, std::span<const RoiBox> boxes, const RoiAlignParams& params) {
  Tape& t = tape_of(level);
  require_rank("roi_align", level, 4);
  if (params.out_size < 1) throw ConfigError("roi_align: out_size must be >= 1");
  if (params.sampling_ratio < 1) throw ConfigError("roi_align: sampling_ratio must be >= 1");
  if (!(params.spatial_scale > 0.0)) throw ConfigError("roi_align: spatial_scale must be positive");
  const std::int64_t N = level.dim(0), C = level.dim(1), H = level.dim(2), W = level.dim(3);
  const std::int64_t R = static_cast<std::int64_t>(boxes.size());
  const int S = params.out_size;
  const std::int64_t samples = static_cast<std::int64_t>(params.sampling_ratio) * params.sampling_ratio;
  const double count = static_cast<double>(samples);
  std::vector<RoiBox> rois(boxes.begin(), boxes.end());
  for (const RoiBox& b : rois) {
    if (b.batch_idx < 0 || b.batch_idx >= N) {
      throw InputError("roi_align: batch index " + std::to_string(b.batch_idx) +
                       " outside batch of " + std::to_string(N));
    }
  }

  Tensor out(Shape{R, C, S, S});
  const double* X = level.value().ptr();
  for (std::int64_t r = 0; r < R; ++r) {
    const std::vector<Tap> taps = box_taps(rois[static_cast<std::size_t>(r)], params, H, W);
    const double* base = X + rois[static_cast<std::size_t>(r)].batch_idx * C * H * W;
    for (std::int64_t c = 0; c < C; ++c) {
      const double* plane = base + c * H * W;
      double* o = out.ptr() + (r * C + c) * S * S;
      for (std::int64_t bin = 0; bin < S * S; ++bin) {
        double acc = 0.0;
        for (std::int64_t s = 0; s < samples; ++s) {
          const Tap& tp = taps[static_cast<std::size_t>(bin * samples + s)];
          if (!tp.valid) continue;
          acc += tp.w1 * plane[tp.i1] + tp.w2 * plane[tp.i2] + tp.w3 * plane[tp.i3] +
                 tp.w4 * plane[tp.i4];
        }
        o[bin] = acc / count;
      }
    }
  }
  t.add_flops(R * C * S * S * samples * 4);

  return finish("roi_align", t, std::move(out), {level},
                [=](Tape& tp, const Tensor&, const Tensor& gout) {
                  double* dX = tp.grad(level).ptr();
                  for (std::int64_t r = 0; r < R; ++r) {
                    const RoiBox& b = rois[static_cast<std::size_t>(r)];
                    const std::vector<Tap> taps = box_taps(b, params, H, W);
                    double* base = dX + b.batch_idx * C * H * W;
                    for (std::int64_t c = 0; c < C; ++c) {
                      double* plane = base + c * H * W;
                      const double* g = gout.ptr() + (r * C + c) * S * S;
                      for (std::int64_t bin = 0; bin < S * S; ++bin) {
                        const double gb = g[bin] / count;
                        for (std::int64_t s = 0; s < samples; ++s) {
                          const Tap& q = taps[static_cast<std::size_t>(bin * samples + s)];
                          if (!q.valid) continue;
                          plane[q.i1] += gb * q.w1;
                          plane[q.i2] += gb * q.w2;
                          plane[q.i3] += gb * q.w3;
                          plane[q.i4] += gb * q.w4;
                        }
                      }
                    }
                  }
                });
}

}  // namespace groie
