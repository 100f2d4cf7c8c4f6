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
#include <string>
#include <vector>

#include "groie/pyramid.hpp"
#include "groie/rng.hpp"
#include "groie/tensor.hpp"

namespace groie::harness {

// Object classes. Label 0 is reserved for background.
enum ShapeClass : int { kBackground = 0, kCircle = 1, kSquare = 2, kTriangle = 3 };
inline constexpr int kNumClasses = 3;

std::string class_name(int cls);

struct SceneSpec {
  int height = 128;
  int width = 128;
  int min_objects = 1;
  int max_objects = 4;
  double min_size = 8.0;
  double max_size = 96.0;
  double noise = 0.1;  // background and fill jitter, uniform in +-noise
  int placement_retries = 50;

  void validate() const;
};

// Binary mask at image resolution, row-major H x W.
using Mask = std::vector<std::uint8_t>;

struct ObjectGt {
  int cls = kBackground;
  RoiBox box;  // tight box of `mask`, pixel-edge coordinates
  Mask mask;
};

struct GroundTruth {
  int height = 0;
  int width = 0;
  std::vector<ObjectGt> objects;
};

struct Scene {
  Tensor image;  // [3, H, W], values in [0, 1]
  GroundTruth gt;
};

// Objects are drawn one by one: class uniform, side log-uniform in
// [min_size, max_size], position uniform with the shape fully inside. A
// placement whose box touches an earlier one is redrawn up to
// placement_retries times, after which the overlap is accepted.
Scene generate_scene(SeededRng& rng, const SceneSpec& spec);

// Scene i is drawn from SeededRng(seed).fork(i).
std::vector<Scene> generate_scenes(std::uint64_t seed, int count, const SceneSpec& spec);

// Smallest box covering every set pixel. Throws InputError for an empty mask.
RoiBox mask_bbox(const Mask& mask, int height, int width);

// Binary PPM (P6), 8 bits per channel.
void write_ppm(const Tensor& image, const std::string& path);

}  // namespace groie::harness
