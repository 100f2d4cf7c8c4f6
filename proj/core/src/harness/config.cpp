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

#include "groie/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "groie/errors.hpp"

namespace groie::harness {

using nlohmann::json;

void RunConfig::validate() const {
  if (scenes < 1) throw ConfigError("scenes must be >= 1");
  if (eval_scenes < 1) throw ConfigError("eval_scenes must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (warmup_iters < 0 || !(warmup_ratio > 0.0 && warmup_ratio <= 1.0)) throw ConfigError("bad warmup");
  if (max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (masks_per_image < 0) throw ConfigError("masks_per_image must be >= 0");
  if (!(canonical_size > 0.0)) throw ConfigError("canonical_size must be positive");
  if (extractor.channels != channels) throw ConfigError("extractor channels differ from run channels");
  scene.validate();
  proposals.validate();
  model().validate();
}

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.extractor = extractor;
  m.extractor.channels = channels;
  m.extractor.assign.canonical_size = canonical_size;
  return m;
}

ExtractorConfig parse_extractor_spec(const std::string& spec, std::int64_t channels) {
  ExtractorConfig c;
  if (spec == "groie") {
    c = ExtractorConfig::groie(BlockKind::Conv5, Aggregation::Sum, BlockKind::Attention);
  } else if (spec.rfind("groie(", 0) == 0 && spec.back() == ')') {
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(6, spec.size() - 7));
    for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("expected groie(pre,agg,post), got '" + spec + "'");
    c = ExtractorConfig::groie(parse_block_kind(parts[0]), parse_aggregation(parts[1]), parse_block_kind(parts[2]));
  } else {
    c.strategy = parse_strategy(spec);
  }
  c.channels = channels;
  return c;
}

namespace {

template <typename T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"seed", "scenes", "epochs", "lr", "channels", "extractor", "eval_scenes", "eval_seed", "batch_size",
                  "momentum", "weight_decay", "warmup_iters", "warmup_ratio", "lr_steps", "max_iters",
                  "masks_per_image", "eval_each_epoch", "canonical_size"},
                 "run config");
  RunConfig c;
  c.seed = get<std::uint64_t>(j, "seed", c.seed);
  c.scenes = get<int>(j, "scenes", c.scenes);
  c.epochs = get<int>(j, "epochs", c.epochs);
  c.lr = get<double>(j, "lr", c.lr);
  c.channels = get<std::int64_t>(j, "channels", c.channels);
  c.eval_scenes = get<int>(j, "eval_scenes", c.eval_scenes);
  c.eval_seed = get<std::uint64_t>(j, "eval_seed", c.eval_seed);
  c.batch_size = get<int>(j, "batch_size", c.batch_size);
  c.momentum = get<double>(j, "momentum", c.momentum);
  c.weight_decay = get<double>(j, "weight_decay", c.weight_decay);
  c.warmup_iters = get<int>(j, "warmup_iters", c.warmup_iters);
  c.warmup_ratio = get<double>(j, "warmup_ratio", c.warmup_ratio);
  c.lr_steps = get<std::vector<int>>(j, "lr_steps", c.lr_steps);
  c.max_iters = get<int>(j, "max_iters", c.max_iters);
  c.masks_per_image = get<int>(j, "masks_per_image", c.masks_per_image);
  c.eval_each_epoch = get<bool>(j, "eval_each_epoch", c.eval_each_epoch);
  c.canonical_size = get<double>(j, "canonical_size", c.canonical_size);

  c.extractor.channels = c.channels;
  if (j.contains("extractor")) {
    const json& e = j.at("extractor");
    if (e.is_string()) {
      c.extractor = parse_extractor_spec(e.get<std::string>(), c.channels);
    } else if (!e.is_object()) {
      throw ConfigError("'extractor' must be a string or an object");
    } else {
      reject_unknown(e, {"strategy", "pre", "agg", "post"}, "extractor");
      const auto strategy = get<std::string>(e, "strategy", "sum");
      c.extractor.strategy = parse_strategy(strategy);
      if (c.extractor.strategy == Strategy::Groie) {
        c.extractor.pre = parse_block_kind(get<std::string>(e, "pre", "none"));
        c.extractor.agg = parse_aggregation(get<std::string>(e, "agg", "sum"));
        c.extractor.post = parse_block_kind(get<std::string>(e, "post", "none"));
      } else if (e.contains("pre") || e.contains("agg") || e.contains("post")) {
        throw ConfigError("pre/agg/post only apply to the groie strategy");
      }
    }
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& c) {
  json e = {{"strategy", strategy_name(c.extractor.strategy)}};
  if (c.extractor.strategy == Strategy::Groie) {
    e["pre"] = block_kind_name(c.extractor.pre);
    e["agg"] = aggregation_name(c.extractor.agg);
    e["post"] = block_kind_name(c.extractor.post);
  }
  json j = {{"seed", c.seed},
            {"scenes", c.scenes},
            {"epochs", c.epochs},
            {"lr", c.lr},
            {"channels", c.channels},
            {"extractor", e},
            {"eval_scenes", c.eval_scenes},
            {"eval_seed", c.eval_seed},
            {"batch_size", c.batch_size},
            {"momentum", c.momentum},
            {"weight_decay", c.weight_decay},
            {"warmup_iters", c.warmup_iters},
            {"warmup_ratio", c.warmup_ratio},
            {"lr_steps", c.lr_steps},
            {"max_iters", c.max_iters},
            {"masks_per_image", c.masks_per_image},
            {"eval_each_epoch", c.eval_each_epoch},
            {"canonical_size", c.canonical_size}};
  return j.dump(2) + "\n";
}

}  // namespace groie::harness
