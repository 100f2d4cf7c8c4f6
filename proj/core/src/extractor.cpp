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

#include "groie/extractor.hpp"

#include <map>

#include "groie/errors.hpp"
#include "groie/ops.hpp"
#include "groie/roi_align.hpp"

namespace groie {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::SingleLevel: return "single";
    case Strategy::RandomLevel: return "random";
    case Strategy::Sum: return "sum";
    case Strategy::SumPlus: return "sum_plus";
    case Strategy::Concat: return "concat";
    case Strategy::Groie: return "groie";
  }
  return "sum";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "single") return Strategy::SingleLevel;
  if (name == "random") return Strategy::RandomLevel;
  if (name == "sum") return Strategy::Sum;
  if (name == "sum_plus") return Strategy::SumPlus;
  if (name == "concat") return Strategy::Concat;
  if (name == "groie") return Strategy::Groie;
  throw ConfigError("unknown extraction strategy '" + name + "'");
}

std::string aggregation_name(Aggregation a) { return a == Aggregation::Sum ? "sum" : "concat"; }

Aggregation parse_aggregation(const std::string& name) {
  if (name == "sum") return Aggregation::Sum;
  if (name == "concat") return Aggregation::Concat;
  throw ConfigError("unknown aggregation '" + name + "'");
}

ExtractorConfig ExtractorConfig::groie(BlockKind pre, Aggregation agg, BlockKind post) {
  ExtractorConfig c;
  c.strategy = Strategy::Groie;
  c.pre = pre;
  c.agg = agg;
  c.post = post;
  return c;
}

void ExtractorConfig::validate() const {
  assign.validate();
  if (out_size < 1) throw ConfigError("extractor out_size must be >= 1");
  if (channels < 1) throw ConfigError("extractor channels must be >= 1");
  if (sampling_ratio < 1) throw ConfigError("extractor sampling_ratio must be >= 1");
  if (strategy == Strategy::Groie) {
    for (BlockKind k : {pre, post}) {
      if (k == BlockKind::NonLocal && channels % 2 != 0) {
        throw ConfigError("non-local block needs an even channel count");
      }
      if (k == BlockKind::Attention && channels % attention_heads != 0) {
        throw ConfigError("attention heads must divide the channel count");
      }
    }
  }
}

std::string ExtractorConfig::label() const {
  if (strategy != Strategy::Groie) return strategy_name(strategy);
  return "groie(" + block_kind_name(pre) + "," + aggregation_name(agg) + "," +
         block_kind_name(post) + ")";
}

RoiExtractor::RoiExtractor(const ExtractorConfig& config, ParamStore& store,
                           const std::string& prefix, SeededRng& rng)
    : config_(config) {
  config_.validate();
  const std::int64_t C = config_.channels;
  const int levels = config_.assign.k_max - config_.assign.k_min + 1;
  auto reduce = [&](std::int64_t cin) {
    reduce_w_ = &store.add_xavier(prefix + ".reduce.weight", Shape{C, cin, 1, 1}, cin, C, rng);
    reduce_b_ = &store.add_zeros(prefix + ".reduce.bias", Shape{C});
  };
  switch (config_.strategy) {
    case Strategy::SingleLevel:
    case Strategy::RandomLevel:
    case Strategy::Sum:
      break;
    case Strategy::SumPlus:
      reduce(C);
      break;
    case Strategy::Concat:
      reduce(C * levels);
      break;
    case Strategy::Groie:
      for (int k = config_.assign.k_min; k <= config_.assign.k_max; ++k) {
        pre_.push_back(make_block(config_.pre, store, prefix + ".pre.level" + std::to_string(k), C,
                                  config_.out_size, config_.attention_heads, rng));
      }
      if (config_.agg == Aggregation::Concat) reduce(C * levels);
      post_ = make_block(config_.post, store, prefix + ".post", C, config_.out_size,
                         config_.attention_heads, rng);
      break;
  }
}

const Block* RoiExtractor::pre_block(int level) const {
  const int i = level - config_.assign.k_min;
  if (i < 0 || i >= static_cast<int>(pre_.size())) return nullptr;
  return pre_[static_cast<std::size_t>(i)].get();
}

Var RoiExtractor::pool_level(const FeaturePyramid& pyramid, int k,
                             std::span<const RoiBox> boxes) const {
  RoiAlignParams p;
  p.out_size = config_.out_size;
  p.sampling_ratio = config_.sampling_ratio;
  p.spatial_scale = 1.0 / static_cast<double>(FeaturePyramid::stride(k));
  return roi_align(pyramid.level(k), boxes, p);
}

Var RoiExtractor::pool_selected(const FeaturePyramid& pyramid, std::span<const RoiBox> boxes,
                                const std::vector<int>& levels) const {
  std::map<int, std::vector<RoiBox>> groups;
  std::vector<std::pair<int, std::int64_t>> source(boxes.size());
  std::map<int, int> part_of;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    auto& g = groups[levels[i]];
    source[i] = {levels[i], static_cast<std::int64_t>(g.size())};
    g.push_back(boxes[i]);
  }
  std::vector<Var> parts;
  for (auto& [k, g] : groups) {
    part_of[k] = static_cast<int>(parts.size());
    parts.push_back(pool_level(pyramid, k, g));
  }
  for (auto& s : source) s.first = part_of[s.first];
  return merge_rows(parts, source);
}

Var RoiExtractor::aggregate(Tape& tape, std::vector<Var> pooled) const {
  const bool concat = config_.strategy == Strategy::Concat ||
                      (config_.strategy == Strategy::Groie && config_.agg == Aggregation::Concat);
  if (concat) {
    return conv2d(concat_channels(pooled), tape.param(*reduce_w_), tape.param(*reduce_b_), 1, 0);
  }
  Var acc = pooled.front();
  for (std::size_t i = 1; i < pooled.size(); ++i) acc = add(acc, pooled[i]);
  return acc;
}

ExtractedRois RoiExtractor::extract(Tape& tape, const FeaturePyramid& pyramid,
                                    std::span<const RoiBox> boxes, SeededRng& rng) const {
  const AssignConfig& a = config_.assign;
  if (pyramid.min_level != a.k_min || pyramid.max_level() != a.k_max) {
    throw ConfigError("pyramid levels [" + std::to_string(pyramid.min_level) + "," +
                      std::to_string(pyramid.max_level()) + "] do not match extractor levels [" +
                      std::to_string(a.k_min) + "," + std::to_string(a.k_max) + "]");
  }
  if (pyramid.channels() != config_.channels) {
    throw ConfigError("pyramid has " + std::to_string(pyramid.channels()) +
                      " channels, extractor expects " + std::to_string(config_.channels));
  }
  ExtractedRois result;
  result.boxes.assign(boxes.begin(), boxes.end());
  const int S = config_.out_size;
  if (boxes.empty()) {
    result.features = tape.constant(Tensor(Shape{0, config_.channels, S, S}));
    return result;
  }

  switch (config_.strategy) {
    case Strategy::SingleLevel:
    case Strategy::RandomLevel: {
      std::vector<int> levels(boxes.size());
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        levels[i] = config_.strategy == Strategy::SingleLevel ? assign_level(boxes[i], a)
                                                              : random_level(rng, a);
      }
      result.features = pool_selected(pyramid, boxes, levels);
      break;
    }
    case Strategy::Sum:
    case Strategy::SumPlus:
    case Strategy::Concat:
    case Strategy::Groie: {
      std::vector<Var> pooled;
      for (int k = a.k_min; k <= a.k_max; ++k) {
        Var p = pool_level(pyramid, k, boxes);
        if (const Block* pre = pre_block(k)) p = pre->forward(tape, p);
        pooled.push_back(p);
      }
      Var agg = aggregate(tape, std::move(pooled));
      if (config_.strategy == Strategy::SumPlus) {
        agg = conv2d(agg, tape.param(*reduce_w_), tape.param(*reduce_b_), 1, 0);
      }
      if (post_) agg = post_->forward(tape, agg);
      result.features = agg;
      break;
    }
  }
  return result;
}

RoiExtractor build_extractor(const ExtractorConfig& config, ParamStore& store, SeededRng& rng,
                             const std::string& prefix) {
  return RoiExtractor(config, store, prefix, rng);
}

}  // namespace groie
