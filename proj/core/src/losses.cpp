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

#include <algorithm>
#include <cmath>
#include <string>

#include "groie/errors.hpp"
#include "groie/ops.hpp"
#include "ops_internal.hpp"

namespace groie {

using namespace detail;

Var cross_entropy(Var logits, std::span<const int> labels) {
  Tape& t = tape_of(logits);
  require_rank("cross_entropy", logits, 2);
  const std::int64_t R = logits.dim(0), K = logits.dim(1);
  if (static_cast<std::int64_t>(labels.size()) != R) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(R) + " rows");
  }
  std::vector<int> lab(labels.begin(), labels.end());
  for (int l : lab) {
    if (l < 0 || l >= K) {
      throw InputError("cross_entropy: label " + std::to_string(l) + " outside [0," +
                       std::to_string(K) + ")");
    }
  }
  if (R == 0) return t.constant(Tensor::scalar(0.0));
  const double* X = logits.value().ptr();
  std::vector<double> prob(static_cast<std::size_t>(R * K));
  double total = 0.0;
  for (std::int64_t r = 0; r < R; ++r) {
    const double* x = X + r * K;
    double mx = x[0];
    for (std::int64_t k = 1; k < K; ++k) mx = std::max(mx, x[k]);
    double z = 0.0;
    for (std::int64_t k = 0; k < K; ++k) z += std::exp(x[k] - mx);
    const double lse = mx + std::log(z);
    total += lse - x[lab[static_cast<std::size_t>(r)]];
    for (std::int64_t k = 0; k < K; ++k) {
      prob[static_cast<std::size_t>(r * K + k)] = std::exp(x[k] - lse);
    }
  }
  const double inv = 1.0 / static_cast<double>(R);
  return finish("cross_entropy", t, Tensor::scalar(total * inv), {logits},
                [=](Tape& tp, const Tensor&, const Tensor& gout) {
                  double* d = tp.grad(logits).ptr();
                  const double g = gout[0] * inv;
                  for (std::int64_t r = 0; r < R; ++r) {
                    for (std::int64_t k = 0; k < K; ++k) {
                      const double y = k == lab[static_cast<std::size_t>(r)] ? 1.0 : 0.0;
                      d[r * K + k] += g * (prob[static_cast<std::size_t>(r * K + k)] - y);
                    }
                  }
                });
}

Var smooth_l1(Var pred, const Tensor& target, double beta) {
  Tape& t = tape_of(pred);
  if (pred.shape() != target.shape()) {
    throw DimensionError("smooth_l1: prediction " + shape_str(pred.shape()) + " vs target " +
                         shape_str(target.shape()));
  }
  if (!(beta > 0.0)) throw ConfigError("smooth_l1: beta must be positive");
  const std::int64_t n = pred.value().numel();
  if (n == 0) return t.constant(Tensor::scalar(0.0));
  std::vector<double> diff(static_cast<std::size_t>(n));
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = pred.value()[i] - target[i];
    diff[static_cast<std::size_t>(i)] = d;
    const double a = std::abs(d);
    total += a < beta ? 0.5 * d * d / beta : a - 0.5 * beta;
  }
  const double inv = 1.0 / static_cast<double>(n);
  return finish("smooth_l1", t, Tensor::scalar(total * inv), {pred},
                [=](Tape& tp, const Tensor&, const Tensor& gout) {
                  double* dp = tp.grad(pred).ptr();
                  const double g = gout[0] * inv;
                  for (std::int64_t i = 0; i < n; ++i) {
                    const double d = diff[static_cast<std::size_t>(i)];
                    const double dd = std::abs(d) < beta ? d / beta : (d > 0 ? 1.0 : -1.0);
                    dp[i] += g * dd;
                  }
                });
}

Var bce(Var prob, const Tensor& target) {
  Tape& t = tape_of(prob);
  if (prob.shape() != target.shape()) {
    throw DimensionError("bce: prediction " + shape_str(prob.shape()) + " vs target " +
                         shape_str(target.shape()));
  }
  constexpr double kLo = 1e-7, kHi = 1.0 - 1e-7;
  const std::int64_t n = prob.value().numel();
  if (n == 0) return t.constant(Tensor::scalar(0.0));
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double p = std::clamp(prob.value()[i], kLo, kHi);
    const double y = target[i];
    total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  const double inv = 1.0 / static_cast<double>(n);
  return finish("bce", t, Tensor::scalar(total * inv), {prob},
                [=, tgt = target](Tape& tp, const Tensor&, const Tensor& gout) {
                  double* dp = tp.grad(prob).ptr();
                  const double g = gout[0] * inv;
                  const double* P = prob.value().ptr();
                  for (std::int64_t i = 0; i < n; ++i) {
                    // clamped region is flat
                    if (P[i] < kLo || P[i] > kHi) continue;
                    const double y = tgt[i];
                    dp[i] += g * (-y / P[i] + (1.0 - y) / (1.0 - P[i]));
                  }
                });
}

}  // namespace groie
