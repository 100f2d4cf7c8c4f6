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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "groie/autograd.hpp"

namespace groie {

struct ParamGradError {
  std::string name;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  std::int64_t worst_index = -1;
};

struct GradCheckReport {
  std::vector<ParamGradError> params;
  double tol = 1e-5;
  bool pass = true;

  double max_rel_err() const;
  // Fixed-width text table, one row per parameter.
  std::string table() const;
};

// Records a scalar-valued computation on the given (empty) tape.
using ScalarFn = std::function<Var(Tape&)>;

// Central-difference check of reverse-mode gradients. An element passes when
// |a - n| / max(|a|, |n|, 1e-8) < tol. Parameters are perturbed in place and
// restored; their grad accumulators are overwritten with the analytic
// gradient. Throws UsageError when two baseline evaluations of fn differ.
GradCheckReport check_gradients(const ScalarFn& fn, std::span<Parameter* const> params,
                                double eps = 1e-5, double tol = 1e-5);

}  // namespace groie
