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

#include <string>
#include <vector>

#include "groie/gradcheck.hpp"

namespace groie::harness {

struct GradSuiteEntry {
  std::string name;
  GradCheckReport report;
};

// Central-difference checks of every differentiable piece: the tensor ops and
// losses, roi_align, each block kind, and every extraction strategy end to end
// (C=8, S=7) with gradients taken w.r.t. parameters and pyramid levels.
// Inputs are randomized from `seed`; each scalar probe is a fixed positive
// weighting of the output elements scaled to about 1e-4 so that round-off in
// the central difference stays below the 1e-8 absolute floor.
std::vector<GradSuiteEntry> run_gradient_suite(double tol = 1e-5, double eps = 1e-5, std::uint64_t seed = 0);

// Same, restricted to entries whose name contains `filter`.
std::vector<GradSuiteEntry> run_gradient_suite(const std::string& filter, double tol = 1e-5, double eps = 1e-5,
                                               std::uint64_t seed = 0);

}  // namespace groie::harness
