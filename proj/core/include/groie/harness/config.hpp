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

#include "groie/extractor.hpp"
#include "groie/harness/model.hpp"
#include "groie/harness/proposals.hpp"
#include "groie/harness/scene.hpp"

namespace groie::harness {

// Everything a training run depends on. JSON keys match the field names;
// the extractor is an object {"strategy", "pre", "agg", "post"} or a
// parse_extractor_spec string.
struct RunConfig {
  std::uint64_t seed = 0;
  int scenes = 256;
  int epochs = 12;
  double lr = 0.01;
  std::int64_t channels = 64;
  ExtractorConfig extractor;

  int eval_scenes = 64;
  std::uint64_t eval_seed = 7919;  // held-out set, shared by every run
  int batch_size = 2;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int warmup_iters = 100;
  double warmup_ratio = 1.0 / 3.0;
  std::vector<int> lr_steps{9, 11};  // lr x0.1 once these many epochs are done
  int max_iters = 0;                 // stop early after this many iterations (0: no limit)
  int masks_per_image = 8;
  bool eval_each_epoch = true;
  // Level-assignment reference size. 224 belongs to ~800 px images; scaled to
  // the 128 px scenes it is ~36, which spreads 8..96 px objects over P2..P5.
  double canonical_size = 36.0;

  SceneSpec scene;
  ProposalConfig proposals;

  void validate() const;
  ModelConfig model() const;
};

// Throws ConfigError on malformed JSON, unknown keys or out-of-domain values.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);

// "single", "random", "sum", "sum_plus", "concat", "groie" (meaning
// groie(conv5,sum,attention)) or an explicit "groie(pre,agg,post)".
ExtractorConfig parse_extractor_spec(const std::string& spec, std::int64_t channels);

}  // namespace groie::harness
