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

namespace groie::harness {

// Flat binary: "GRIE", u32 version, then one record per parameter until end
// of file: u32 name length, name bytes, u32 rank, rank x u64 dims, float64
// data. All integers and floats little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ParamStore& store, const std::string& path);

// Fills every parameter of `store` from the file. A missing, extra or
// differently shaped record is a ConfigError; a truncated or foreign file an
// InputError.
void load_checkpoint(ParamStore& store, const std::string& path);

}  // namespace groie::harness
