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
#include <span>
#include <utility>
#include <vector>

#include "groie/autograd.hpp"

// Differentiable operations. Each records its result on the tape of its
// inputs; all inputs of one call must share a tape.
namespace groie {

// input [N,Cin,H,W], weight [Cout,Cin,k,k] (k odd), bias [Cout].
Var conv2d(Var input, Var weight, Var bias, int stride, int pad);

// input [R,D], weight [D,E], bias [E] -> [R,E].
Var linear(Var input, Var weight, Var bias);

// Batched matrix product: [B,M,K] x [B,K,N] -> [B,M,N].
Var bmm(Var a, Var b);

// Numerically stable softmax along axis (negative axes count from the end).
Var softmax(Var input, int axis);

Var relu(Var x);
Var sigmoid(Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
// Concatenates [N,Ci,H,W] tensors along the channel axis, in argument order.
Var concat_channels(const std::vector<Var>& parts);

Var reshape(Var x, Shape shape);
// [B,M,N] -> [B,N,M].
Var transpose_last2(Var x);
// [N,C,H,W] -> [N,C,2H,2W], nearest neighbour.
Var upsample_nearest2x(Var x);

// Rows (axis 0) of x in the order given by idx.
Var select_rows(Var x, std::span<const std::int64_t> idx);

// Output row r is row source[r].second of parts[source[r].first]. All parts
// must agree on every axis but the first.
Var merge_rows(const std::vector<Var>& parts,
               std::span<const std::pair<int, std::int64_t>> source);

Var sum(Var x);
Var mean(Var x);

// Query-content x relative-position energies on an S x S grid.
// query [R,M,D,S*S], table [M,D,(2S-1)^2] -> [R,M,S*S,S*S] with
// out[r,m,q,k] = sum_d query[r,m,d,q] * table[m,d,offset(k - q)] where
// offset(dy,dx) = (dy + S - 1) * (2S - 1) + (dx + S - 1).
Var relative_position_logits(Var query, Var table, int grid);

// Mean cross-entropy of logits [R,K] against labels in [0,K). R = 0 gives 0.
Var cross_entropy(Var logits, std::span<const int> labels);
// Mean smooth-L1 over all elements; |d| < beta: 0.5 d^2 / beta, else |d| - 0.5 beta.
Var smooth_l1(Var pred, const Tensor& target, double beta = 1.0);
// Mean binary cross-entropy; prob is clamped to [1e-7, 1 - 1e-7].
Var bce(Var prob, const Tensor& target);

}  // namespace groie
