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

#include "groie/autograd.hpp"
#include "groie/pyramid.hpp"

namespace groie {

struct RoiAlignParams {
  int out_size = 7;        // S: output is S x S per RoI
  int sampling_ratio = 2;  // samples per bin along each axis
  double spatial_scale = 1.0;  // feature cells per image pixel, 1 / stride
};

// Pools a fixed S x S grid from `level` [N,C,H,W] for every box, giving
// [R,C,S,S]. Each bin averages sampling_ratio^2 bilinear samples placed at
// sub-bin centres, in continuous coordinates with the half-pixel shift
// (feature cell i covers [i, i+1) and its value sits at i + 0.5). A sample
// further than one cell outside the map contributes zero; samples inside that
// band read the clamped border. Differentiable w.r.t. `level` only.
Var roi_align(Var level, std::span<const RoiBox> boxes, const RoiAlignParams& params);

}  // namespace groie
