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

#include "groie/blocks.hpp"

#include <cmath>

#include "groie/errors.hpp"
#include "groie/ops.hpp"

namespace groie {

std::string block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::None: return "none";
    case BlockKind::Conv1: return "conv1";
    case BlockKind::Conv3: return "conv3";
    case BlockKind::Conv5: return "conv5";
    case BlockKind::NonLocal: return "nonlocal";
    case BlockKind::Attention: return "attention";
  }
  return "none";
}

BlockKind parse_block_kind(const std::string& name) {
  if (name == "none") return BlockKind::None;
  if (name == "conv1") return BlockKind::Conv1;
  if (name == "conv3") return BlockKind::Conv3;
  if (name == "conv5") return BlockKind::Conv5;
  if (name == "nonlocal") return BlockKind::NonLocal;
  if (name == "attention") return BlockKind::Attention;
  throw ConfigError("unknown block kind '" + name + "'");
}

namespace {

Parameter& conv_weight(ParamStore& store, const std::string& name, std::int64_t cout,
                       std::int64_t cin, int k, SeededRng& rng) {
  return store.add_xavier(name, Shape{cout, cin, k, k}, cin * k * k, cout * k * k, rng);
}

void check_input(const char* who, Var x, std::int64_t channels) {
  if (x.value().rank() != 4) {
    throw DimensionError(std::string(who) + ": expected [R,C,S,S], got " + shape_str(x.shape()));
  }
  if (x.dim(1) != channels) {
    throw DimensionError(std::string(who) + ": block built for " + std::to_string(channels) +
                         " channels, input has " + std::to_string(x.dim(1)));
  }
}

}  // namespace

ConvBlock::ConvBlock(ParamStore& store, const std::string& prefix, std::int64_t channels,
                     int kernel, SeededRng& rng)
    : channels_(channels), kernel_(kernel) {
  if (kernel != 1 && kernel != 3 && kernel != 5) {
    throw ConfigError("conv block kernel must be 1, 3 or 5");
  }
  weight_ = &conv_weight(store, prefix + ".conv.weight", channels, channels, kernel, rng);
  bias_ = &store.add_zeros(prefix + ".conv.bias", Shape{channels});
}

BlockKind ConvBlock::kind() const {
  switch (kernel_) {
    case 1: return BlockKind::Conv1;
    case 3: return BlockKind::Conv3;
    default: return BlockKind::Conv5;
  }
}

Var ConvBlock::forward(Tape& tape, Var x) const {
  check_input("conv block", x, channels_);
  return conv2d(x, tape.param(*weight_), tape.param(*bias_), 1, kernel_ / 2);
}

NonLocalBlock::NonLocalBlock(ParamStore& store, const std::string& prefix,
                             std::int64_t channels, SeededRng& rng)
    : channels_(channels) {
  if (channels % 2 != 0) throw ConfigError("non-local block needs an even channel count");
  const std::int64_t inner = channels / 2;
  theta_w_ = &conv_weight(store, prefix + ".theta.weight", inner, channels, 1, rng);
  theta_b_ = &store.add_zeros(prefix + ".theta.bias", Shape{inner});
  phi_w_ = &conv_weight(store, prefix + ".phi.weight", inner, channels, 1, rng);
  g_w_ = &conv_weight(store, prefix + ".g.weight", inner, channels, 1, rng);
  g_b_ = &store.add_zeros(prefix + ".g.bias", Shape{inner});
  out_w_ = &store.add_zeros(prefix + ".wz.weight", Shape{channels, inner, 1, 1});
  out_b_ = &store.add_zeros(prefix + ".wz.bias", Shape{channels});
}

Var NonLocalBlock::forward(Tape& tape, Var x) const {
  check_input("non-local block", x, channels_);
  const std::int64_t R = x.dim(0), S = x.dim(2), P = x.dim(2) * x.dim(3);
  const std::int64_t inner = channels_ / 2;
  Var theta = conv2d(x, tape.param(*theta_w_), tape.param(*theta_b_), 1, 0);
  // no phi bias: it shifts every key energy of a query equally and cancels in the softmax
  Var phi = conv2d(x, tape.param(*phi_w_), tape.constant(Tensor(Shape{inner})), 1, 0);
  Var g = conv2d(x, tape.param(*g_w_), tape.param(*g_b_), 1, 0);
  Var theta_t = transpose_last2(reshape(theta, Shape{R, inner, P}));  // [R,P,C']
  Var affinity = bmm(theta_t, reshape(phi, Shape{R, inner, P}));      // [R,P,P]
  Var attn = softmax(affinity, 2);
  Var g_t = transpose_last2(reshape(g, Shape{R, inner, P}));           // [R,P,C']
  Var y = transpose_last2(bmm(attn, g_t));                             // [R,C',P]
  Var y4 = reshape(y, Shape{R, inner, S, x.dim(3)});
  Var z = conv2d(y4, tape.param(*out_w_), tape.param(*out_b_), 1, 0);
  return add(z, x);
}

AttentionBlock::AttentionBlock(ParamStore& store, const std::string& prefix,
                               std::int64_t channels, int grid, int heads, SeededRng& rng)
    : channels_(channels), grid_(grid), heads_(heads) {
  if (heads < 1 || channels % heads != 0) {
    throw ConfigError("attention block: channels (" + std::to_string(channels) +
                      ") not divisible by heads (" + std::to_string(heads) + ")");
  }
  if (grid < 1) throw ConfigError("attention block: grid must be >= 1");
  const std::int64_t depth = channels / heads;
  const std::int64_t offsets = (2 * grid - 1) * (2 * grid - 1);
  q_w_ = &conv_weight(store, prefix + ".query.weight", channels, channels, 1, rng);
  q_b_ = &store.add_zeros(prefix + ".query.bias", Shape{channels});
  table_ = &store.add_xavier(prefix + ".rel_table", Shape{heads, depth, offsets}, depth, depth, rng);
  v_w_ = &conv_weight(store, prefix + ".value.weight", channels, channels, 1, rng);
  v_b_ = &store.add_zeros(prefix + ".value.bias", Shape{channels});
  o_w_ = &store.add_zeros(prefix + ".out.weight", Shape{channels, channels, 1, 1});
  o_b_ = &store.add_zeros(prefix + ".out.bias", Shape{channels});
}

Var AttentionBlock::weights_impl(Tape& tape, Var x) const {
  check_input("attention block", x, channels_);
  if (x.dim(2) != grid_ || x.dim(3) != grid_) {
    throw DimensionError("attention block built for a " + std::to_string(grid_) + "x" +
                         std::to_string(grid_) + " grid, input is " + shape_str(x.shape()));
  }
  const std::int64_t R = x.dim(0), P = static_cast<std::int64_t>(grid_) * grid_;
  const std::int64_t depth = channels_ / heads_;
  Var q = conv2d(x, tape.param(*q_w_), tape.param(*q_b_), 1, 0);
  Var logits = relative_position_logits(reshape(q, Shape{R, heads_, depth, P}),
                                        tape.param(*table_), grid_);
  return softmax(logits, 3);
}

Var AttentionBlock::weights(Tape& tape, Var x) const { return weights_impl(tape, x); }

Var AttentionBlock::heads_output(Tape& tape, Var x) const {
  Var w = weights_impl(tape, x);
  const std::int64_t R = x.dim(0), P = static_cast<std::int64_t>(grid_) * grid_;
  const std::int64_t depth = channels_ / heads_;
  Var v = conv2d(x, tape.param(*v_w_), tape.param(*v_b_), 1, 0);
  Var v_t = transpose_last2(reshape(v, Shape{R * heads_, depth, P}));  // [RM,P,D]
  Var h = bmm(reshape(w, Shape{R * heads_, P, P}), v_t);               // [RM,P,D]
  return reshape(transpose_last2(h), Shape{R, channels_, grid_, grid_});
}

Var AttentionBlock::forward(Tape& tape, Var x) const {
  Var h = heads_output(tape, x);
  return add(conv2d(h, tape.param(*o_w_), tape.param(*o_b_), 1, 0), x);
}

std::unique_ptr<Block> make_block(BlockKind kind, ParamStore& store, const std::string& prefix,
                                  std::int64_t channels, int grid, int heads, SeededRng& rng) {
  switch (kind) {
    case BlockKind::None: return nullptr;
    case BlockKind::Conv1: return std::make_unique<ConvBlock>(store, prefix, channels, 1, rng);
    case BlockKind::Conv3: return std::make_unique<ConvBlock>(store, prefix, channels, 3, rng);
    case BlockKind::Conv5: return std::make_unique<ConvBlock>(store, prefix, channels, 5, rng);
    case BlockKind::NonLocal:
      return std::make_unique<NonLocalBlock>(store, prefix + ".nonlocal", channels, rng);
    case BlockKind::Attention:
      return std::make_unique<AttentionBlock>(store, prefix + ".attention", channels, grid, heads,
                                              rng);
  }
  return nullptr;
}

}  // namespace groie
