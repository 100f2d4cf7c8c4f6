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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "groie/autograd.hpp"
#include "groie/blocks.hpp"
#include "groie/pyramid.hpp"
#include "groie/rng.hpp"

namespace groie {

// How RoI features are gathered from the pyramid.
//   SingleLevel  pool from the level chosen by assign_level
//   RandomLevel  pool from a uniformly drawn level, re-drawn per RoI per call
//   Sum          pool every level and add
//   SumPlus      Sum followed by a 1x1 convolution
//   Concat       pool every level, concatenate channels (k = 2..5), 1x1 back to C
//   Groie        per-level pre block -> Sum/Concat aggregation -> post block
enum class Strategy { SingleLevel, RandomLevel, Sum, SumPlus, Concat, Groie };
enum class Aggregation { Sum, Concat };

// "single", "random", "sum", "sum_plus", "concat", "groie"
std::string strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);
std::string aggregation_name(Aggregation a);
Aggregation parse_aggregation(const std::string& name);

struct ExtractorConfig {
  Strategy strategy = Strategy::Sum;
  BlockKind pre = BlockKind::None;     // Groie only
  Aggregation agg = Aggregation::Sum;  // Groie only
  BlockKind post = BlockKind::None;    // Groie only
  int out_size = 7;
  std::int64_t channels = 64;
  int sampling_ratio = 2;
  int attention_heads = 8;
  AssignConfig assign{};

  static ExtractorConfig groie(BlockKind pre, Aggregation agg, BlockKind post);

  void validate() const;
  // e.g. "groie(conv5,sum,attention)" or "sum_plus"
  std::string label() const;
};

struct ExtractedRois {
  Var features;  // [R, C, S, S]; row r belongs to boxes[r]
  std::vector<RoiBox> boxes;
};

// An extraction strategy with its parameters (held in a ParamStore).
class RoiExtractor {
 public:
  // Allocates every parameter the configuration needs under `prefix`.
  RoiExtractor(const ExtractorConfig& config, ParamStore& store, const std::string& prefix,
               SeededRng& rng);

  ExtractedRois extract(Tape& tape, const FeaturePyramid& pyramid,
                        std::span<const RoiBox> boxes, SeededRng& rng) const;

  const ExtractorConfig& config() const { return config_; }
  // Only set for Concat / SumPlus / Groie with concat aggregation.
  Parameter* reduce_weight() const { return reduce_w_; }
  Parameter* reduce_bias() const { return reduce_b_; }
  const Block* pre_block(int level) const;
  const Block* post_block() const { return post_.get(); }

 private:
  Var pool_level(const FeaturePyramid& pyramid, int k, std::span<const RoiBox> boxes) const;
  Var pool_selected(const FeaturePyramid& pyramid, std::span<const RoiBox> boxes,
                    const std::vector<int>& levels) const;
  Var aggregate(Tape& tape, std::vector<Var> pooled) const;

  ExtractorConfig config_;
  std::vector<std::unique_ptr<Block>> pre_;  // one per level, Groie only
  std::unique_ptr<Block> post_;
  Parameter* reduce_w_ = nullptr;
  Parameter* reduce_b_ = nullptr;
};

// Builds an extractor whose parameter names start with `prefix`.
RoiExtractor build_extractor(const ExtractorConfig& config, ParamStore& store, SeededRng& rng,
                             const std::string& prefix = "groie");

}  // namespace groie
