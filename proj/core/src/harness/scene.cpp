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

#include "groie/harness/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "groie/errors.hpp"

namespace groie::harness {

std::string class_name(int cls) {
  switch (cls) {
    case kBackground: return "background";
    case kCircle: return "circle";
    case kSquare: return "square";
    case kTriangle: return "triangle";
    default: return "class" + std::to_string(cls);
  }
}

void SceneSpec::validate() const {
  if (height < 8 || width < 8) throw ConfigError("scene must be at least 8x8");
  if (min_objects < 1 || max_objects < min_objects) throw ConfigError("bad object count range");
  if (!(min_size >= 2.0) || max_size < min_size) throw ConfigError("bad object size range");
  if (max_size > std::min(height, width)) throw ConfigError("objects larger than the image");
  if (noise < 0.0 || noise > 0.5) throw ConfigError("noise amplitude must lie in [0, 0.5]");
  if (placement_retries < 0) throw ConfigError("placement_retries must be >= 0");
}

namespace {

// Pixel (i, j) belongs to the shape when its centre (j + .5, i + .5) does.
Mask rasterize(int cls, double x0, double y0, double side, int H, int W) {
  Mask m(static_cast<std::size_t>(H) * W, 0);
  const double cx = x0 + side / 2, cy = y0 + side / 2, r = side / 2;
  const int i0 = std::max(0, static_cast<int>(std::floor(y0))), i1 = std::min(H, static_cast<int>(std::ceil(y0 + side)));
  const int j0 = std::max(0, static_cast<int>(std::floor(x0))), j1 = std::min(W, static_cast<int>(std::ceil(x0 + side)));
  for (int i = i0; i < i1; ++i) {
    const double py = i + 0.5;
    for (int j = j0; j < j1; ++j) {
      const double px = j + 0.5;
      bool in = false;
      switch (cls) {
        case kCircle:
          in = (px - cx) * (px - cx) + (py - cy) * (py - cy) <= r * r;
          break;
        case kSquare:
          in = px >= x0 && px <= x0 + side && py >= y0 && py <= y0 + side;
          break;
        case kTriangle: {
          // apex at top centre, base along the bottom edge
          if (py < y0 || py > y0 + side) break;
          const double half = 0.5 * (py - y0);
          in = std::abs(px - cx) <= half;
          break;
        }
        default: break;
      }
      if (in) m[static_cast<std::size_t>(i) * W + j] = 1;
    }
  }
  return m;
}

bool boxes_touch(const RoiBox& a, const RoiBox& b) {
  return a.x1 < b.x2 && b.x1 < a.x2 && a.y1 < b.y2 && b.y1 < a.y2;
}

}  // namespace

Scene generate_scene(SeededRng& rng, const SceneSpec& spec) {
  spec.validate();
  const int H = spec.height, W = spec.width;
  Scene scene;
  scene.gt.height = H;
  scene.gt.width = W;
  scene.image = Tensor(Shape{3, H, W});
  for (auto& v : scene.image.data()) v = 0.5 + rng.uniform(-spec.noise, spec.noise);

  const auto count = rng.uniform_int(spec.min_objects, spec.max_objects);
  const double log_lo = std::log(spec.min_size), log_hi = std::log(spec.max_size);
  for (std::int64_t n = 0; n < count; ++n) {
    const int cls = static_cast<int>(rng.uniform_int(1, kNumClasses));
    const double side = std::exp(rng.uniform(log_lo, log_hi));
    double x0 = 0, y0 = 0;
    Mask mask;
    RoiBox box;
    for (int attempt = 0; attempt <= spec.placement_retries; ++attempt) {
      x0 = rng.uniform(0.0, W - side);
      y0 = rng.uniform(0.0, H - side);
      mask = rasterize(cls, x0, y0, side, H, W);
      box = mask_bbox(mask, H, W);
      bool clear = true;
      for (const auto& o : scene.gt.objects) clear = clear && !boxes_touch(o.box, box);
      if (clear) break;
    }
    // fill colour kept away from the mid-grey background
    double colour[3];
    do {
      for (double& c : colour) c = rng.uniform();
    } while ((std::abs(colour[0] - 0.5) + std::abs(colour[1] - 0.5) + std::abs(colour[2] - 0.5)) / 3 < 0.25);
    for (int c = 0; c < 3; ++c) {
      for (std::int64_t p = 0; p < static_cast<std::int64_t>(H) * W; ++p) {
        if (!mask[static_cast<std::size_t>(p)]) continue;
        scene.image[c * H * W + p] = std::clamp(colour[c] + rng.uniform(-spec.noise, spec.noise), 0.0, 1.0);
      }
    }
    scene.gt.objects.push_back(ObjectGt{cls, box, std::move(mask)});
  }
  return scene;
}

std::vector<Scene> generate_scenes(std::uint64_t seed, int count, const SceneSpec& spec) {
  std::vector<Scene> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  const SeededRng root(seed);
  for (int i = 0; i < count; ++i) {
    SeededRng rng = root.fork(static_cast<std::uint64_t>(i));
    out.push_back(generate_scene(rng, spec));
  }
  return out;
}

RoiBox mask_bbox(const Mask& mask, int height, int width) {
  if (mask.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionError("mask size does not match " + std::to_string(height) + "x" + std::to_string(width));
  }
  int x1 = width, y1 = height, x2 = -1, y2 = -1;
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j) {
      if (!mask[static_cast<std::size_t>(i) * width + j]) continue;
      x1 = std::min(x1, j);
      x2 = std::max(x2, j);
      y1 = std::min(y1, i);
      y2 = std::max(y2, i);
    }
  if (x2 < 0) throw InputError("mask_bbox: empty mask");
  return RoiBox{0, double(x1), double(y1), double(x2 + 1), double(y2 + 1)};
}

void write_ppm(const Tensor& image, const std::string& path) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw DimensionError("write_ppm expects [3,H,W], got " + shape_str(image.shape()));
  }
  const auto H = image.dim(1), W = image.dim(2);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << "P6\n" << W << " " << H << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(W) * 3);
  for (std::int64_t i = 0; i < H; ++i) {
    for (std::int64_t j = 0; j < W; ++j)
      for (std::int64_t c = 0; c < 3; ++c) {
        const double v = std::clamp(image[(c * H + i) * W + j], 0.0, 1.0);
        row[static_cast<std::size_t>(j * 3 + c)] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
      }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw InputError("failed writing " + path);
}

}  // namespace groie::harness
