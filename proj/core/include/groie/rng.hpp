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
#include <cstdint>

namespace groie {

// xoshiro256** seeded through splitmix64. Every draw helper below is defined
// in terms of next_u64() with integer or exactly-specified float arithmetic so
// a seed reproduces the same stream on every platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0);

  std::uint64_t next_u64();

  // [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  // Inclusive range, unbiased (rejection sampling).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Independent generator for a sub-stream, e.g. one per scene index.
  SeededRng fork(std::uint64_t stream) const;

  const std::array<std::uint64_t, 4>& state() const { return s_; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& x);

}  // namespace groie
