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

#include "groie/autograd.hpp"
#include "groie/errors.hpp"

namespace groie::detail {

inline Tape& tape_of(Var v) {
  if (!v.valid()) throw UsageError("operation on an unrecorded Var");
  return *v.tape;
}

inline void same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw UsageError("operands recorded on different tapes");
}

inline void require_rank(const char* op, Var v, int rank) {
  if (v.value().rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         " input, got " + shape_str(v.shape()));
  }
}

inline Var finish(const char* op, Tape& t, Tensor value, std::initializer_list<Var> parents,
           Tape::BackwardFn fn) {
  if (!value.all_finite()) throw InputError(std::string(op) + " produced a non-finite value");
  return t.record(std::move(value), parents, std::move(fn));
}

inline void add_into(Tensor& dst, const Tensor& src) {
  double* d = dst.ptr();
  const double* s = src.ptr();
  const std::int64_t n = dst.numel();
  for (std::int64_t i = 0; i < n; ++i) d[i] += s[i];
}

inline void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

}  // namespace groie::detail
