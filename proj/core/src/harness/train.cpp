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

#include "groie/harness/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "groie/errors.hpp"
#include "groie/harness/checkpoint.hpp"
#include "groie/ops.hpp"

namespace groie::harness {

namespace {

// Stream ids carved out of the run seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kSceneStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kStepStream = 4;
constexpr std::uint64_t kEvalProposalStream = 5;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void require_finite(double v, const char* term, int epoch, int iter) {
  if (!std::isfinite(v)) {
    throw TrainingError(std::string("non-finite ") + term + " at epoch " + std::to_string(epoch) + ", iteration " +
                        std::to_string(iter));
  }
}

std::vector<GtInstance> instances(const Scene& s, int image) {
  std::vector<GtInstance> out;
  for (const auto& o : s.gt.objects) out.push_back(GtInstance{image, o.cls, o.box, o.mask});
  return out;
}

}  // namespace

EvalReport evaluate(const ToyModel& model, std::span<const Scene> scenes, std::uint64_t proposal_seed,
                    const ProposalConfig& pcfg, int masks_per_image) {
  if (scenes.empty()) throw InputError("evaluate: empty dataset");
  const auto t0 = std::chrono::steady_clock::now();
  const SeededRng root(proposal_seed);
  std::vector<Detection> dets;
  std::vector<GtInstance> gts;
  EvalReport r;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    SeededRng rng = root.fork(i);
    const auto props = make_proposals(scenes[i].gt, rng, pcfg);
    auto d = model.detect(scenes[i], props, rng, static_cast<int>(i));
    dets.insert(dets.end(), std::make_move_iterator(d.begin()), std::make_move_iterator(d.end()));
    auto g = instances(scenes[i], static_cast<int>(i));
    gts.insert(gts.end(), g.begin(), g.end());

    // held-out losses under the training targets
    Tape tape;
    const Scene* one[] = {&scenes[i]};
    const std::vector<Proposal> plist[] = {props};
    TrainTargets t = build_targets(one, plist, model.mask_size(), masks_per_image, rng);
    LossTerms l = model.losses(tape, model.features(tape, stack_images(one)), t, rng);
    r.loss_cls += l.cls.value().item();
    r.loss_box += l.box.value().item();
    r.loss_mask += l.mask.value().item();
  }
  const ApSummary s = summarize(dets, gts, true);
  r.ap_box_50 = s.ap_box_50;
  r.ap_box_75 = s.ap_box_75;
  r.ap_mask_50 = s.ap_mask_50;
  r.per_class_ap_box_50 = s.per_class_box_50;
  r.images = static_cast<int>(scenes.size());
  r.loss_cls /= r.images;
  r.loss_box /= r.images;
  r.loss_mask /= r.images;
  r.seconds_per_image = seconds_since(t0) / r.images;
  return r;
}

std::string metrics_csv_header() { return "epoch,loss_cls,loss_box,loss_mask,ap_box_50,ap_box_75,ap_mask_50"; }

std::string metrics_csv_row(const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", m.epoch, m.loss_cls, m.loss_box,
                m.loss_mask, m.ap_box_50, m.ap_box_75, m.ap_mask_50);
  return buf;
}

double learning_rate(const RunConfig& cfg, int epoch, int iter) {
  double lr = cfg.lr;
  for (int s : cfg.lr_steps)
    if (epoch > s) lr *= 0.1;
  if (iter < cfg.warmup_iters) {
    const double a = static_cast<double>(iter) / cfg.warmup_iters;
    lr *= cfg.warmup_ratio + (1.0 - cfg.warmup_ratio) * a;
  }
  return lr;
}

std::unique_ptr<ToyModel> init_model(const RunConfig& cfg) {
  SeededRng init = SeededRng(cfg.seed).fork(kInitStream);
  return std::make_unique<ToyModel>(cfg.model(), init);
}

TrainResult train(const RunConfig& cfg, const std::string& out_dir, std::ostream* log,
                  std::unique_ptr<ToyModel>* model_out) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const SeededRng root(cfg.seed);
  auto model = init_model(cfg);
  ParamStore& store = model->params();

  const std::uint64_t scene_seed = root.fork(kSceneStream).next_u64();
  const std::vector<Scene> train_set = generate_scenes(scene_seed, cfg.scenes, cfg.scene);
  const std::vector<Scene> eval_set = generate_scenes(cfg.eval_seed, cfg.eval_scenes, cfg.scene);
  const std::uint64_t eval_proposal_seed = SeededRng(cfg.eval_seed).fork(kEvalProposalStream).next_u64();

  std::filesystem::path dir;
  if (!out_dir.empty()) {
    dir = out_dir;
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "config.json") << run_config_to_json(cfg);
  }
  if (log) {
    *log << "training " << cfg.extractor.label() << " seed " << cfg.seed << ": " << store.size()
         << " tensors, " << store.total_elements() << " parameters\n";
  }

  std::vector<Tensor> velocity;
  for (auto& p : store) velocity.emplace_back(p->value.shape());

  TrainResult result;
  SeededRng shuffle = root.fork(kShuffleStream);
  const SeededRng step_root = root.fork(kStepStream);
  std::vector<std::size_t> order(train_set.size());
  int iter = 0;
  bool stop = false;
  for (int epoch = 1; epoch <= cfg.epochs && !stop; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    }
    EpochMetrics em;
    em.epoch = epoch;
    int steps = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      if (cfg.max_iters > 0 && iter >= cfg.max_iters) {
        stop = true;
        break;
      }
      SeededRng rng = step_root.fork(static_cast<std::uint64_t>(iter));
      std::vector<const Scene*> batch;
      std::vector<std::vector<Proposal>> props;
      for (std::size_t k = b; k < std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size)); ++k) {
        batch.push_back(&train_set[order[k]]);
        props.push_back(make_proposals(batch.back()->gt, rng, cfg.proposals));
      }
      const TrainTargets targets = build_targets(batch, props, model->mask_size(), cfg.masks_per_image, rng);

      Tape tape;
      LossTerms loss;
      try {
        loss = model->losses(tape, model->features(tape, stack_images(batch)), targets, rng);
      } catch (const InputError& e) {
        throw TrainingError("forward pass failed at epoch " + std::to_string(epoch) + ", iteration " +
                            std::to_string(iter) + ": " + e.what());
      }
      IterationLoss il;
      il.cls = loss.cls.value().item();
      il.box = loss.box.value().item();
      il.mask = loss.mask.value().item();
      require_finite(il.cls, "loss_cls", epoch, iter);
      require_finite(il.box, "loss_box", epoch, iter);
      require_finite(il.mask, "loss_mask", epoch, iter);

      store.zero_grad();
      tape.backward(loss.total);
      il.lr = learning_rate(cfg, epoch, iter);
      std::size_t pi = 0;
      for (auto& p : store) {
        Tensor& v = velocity[pi++];
        double* w = p->value.ptr();
        const double* g = p->grad.ptr();
        double* vv = v.ptr();
        for (std::int64_t j = 0; j < p->value.numel(); ++j) {
          vv[j] = cfg.momentum * vv[j] + (g[j] + cfg.weight_decay * w[j]);
          w[j] -= il.lr * vv[j];
        }
      }
      result.iterations.push_back(il);
      em.loss_cls += il.cls;
      em.loss_box += il.box;
      em.loss_mask += il.mask;
      ++steps;
      ++iter;
    }
    if (steps == 0) break;
    em.loss_cls /= steps;
    em.loss_box /= steps;
    em.loss_mask /= steps;
    const bool last = epoch == cfg.epochs || stop;
    if (cfg.eval_each_epoch || last) {
      const EvalReport r = evaluate(*model, eval_set, eval_proposal_seed, cfg.proposals, cfg.masks_per_image);
      em.ap_box_50 = r.ap_box_50;
      em.ap_box_75 = r.ap_box_75;
      em.ap_mask_50 = r.ap_mask_50;
      if (last) result.final_report = r;
    }
    result.epochs.push_back(em);
    if (log) {
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "epoch %2d  cls %.4f  box %.4f  mask %.4f  AP50 %.4f  AP75 %.4f  mAP50 %.4f  (%.0fs)\n", epoch,
                    em.loss_cls, em.loss_box, em.loss_mask, em.ap_box_50, em.ap_box_75, em.ap_mask_50,
                    seconds_since(t0));
      *log << buf << std::flush;
    }
    if (!dir.empty()) {
      std::ofstream csv(dir / "metrics.csv");
      csv << metrics_csv_header() << "\n";
      for (const auto& m : result.epochs) csv << metrics_csv_row(m) << "\n";
    }
  }
  if (!dir.empty()) save_checkpoint(store, (dir / "model.ckpt").string());
  result.seconds = seconds_since(t0);
  if (model_out) *model_out = std::move(model);
  return result;
}

}  // namespace groie::harness
