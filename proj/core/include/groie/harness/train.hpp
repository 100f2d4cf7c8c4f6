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

#include <functional>
#include <memory>
#include <stdexcept>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "groie/harness/config.hpp"
#include "groie/harness/metrics.hpp"
#include "groie/harness/model.hpp"
#include "groie/harness/scene.hpp"

namespace groie::harness {

// Raised when a loss term stops being finite during training.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

struct EvalReport {
  double ap_box_50 = 0.0;
  double ap_box_75 = 0.0;
  double ap_mask_50 = 0.0;
  std::vector<double> per_class_ap_box_50;  // -1 for classes without ground truth
  double loss_cls = 0.0;
  double loss_box = 0.0;
  double loss_mask = 0.0;
  double seconds_per_image = 0.0;
  int images = 0;
};

// Proposals for scene i come from SeededRng(proposal_seed).fork(i), so a
// dataset is scored identically by every model. Throws InputError for an
// empty dataset.
EvalReport evaluate(const ToyModel& model, std::span<const Scene> scenes, std::uint64_t proposal_seed,
                    const ProposalConfig& proposals = {}, int masks_per_image = 8);

struct EpochMetrics {
  int epoch = 0;
  double loss_cls = 0.0;  // training means over the epoch
  double loss_box = 0.0;
  double loss_mask = 0.0;
  double ap_box_50 = 0.0;  // held-out set after the epoch
  double ap_box_75 = 0.0;
  double ap_mask_50 = 0.0;
};

struct IterationLoss {
  double cls = 0.0;
  double box = 0.0;
  double mask = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochMetrics> epochs;
  std::vector<IterationLoss> iterations;
  EvalReport final_report;
  double seconds = 0.0;
};

// "epoch,loss_cls,loss_box,loss_mask,ap_box_50,ap_box_75,ap_mask_50"
std::string metrics_csv_header();
std::string metrics_csv_row(const EpochMetrics& m);

// Learning rate for iteration `iter` (0-based) inside epoch `epoch` (1-based).
double learning_rate(const RunConfig& cfg, int epoch, int iter);

// Trains a fresh model. When out_dir is non-empty it receives metrics.csv
// (rewritten after every epoch), config.json and model.ckpt. Progress lines go
// to `log` when given. The model is returned through `model_out` if set.
TrainResult train(const RunConfig& cfg, const std::string& out_dir = "", std::ostream* log = nullptr,
                  std::unique_ptr<ToyModel>* model_out = nullptr);

// Model with parameters drawn from the run seed (before any training).
std::unique_ptr<ToyModel> init_model(const RunConfig& cfg);

}  // namespace groie::harness
