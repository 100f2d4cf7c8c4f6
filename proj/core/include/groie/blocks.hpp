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
#include <string>

#include "groie/autograd.hpp"
#include "groie/rng.hpp"

namespace groie {

// Processing block choices for the pre- and post-processing slots.
enum class BlockKind { None, Conv1, Conv3, Conv5, NonLocal, Attention };

// "none", "conv1", "conv3", "conv5", "nonlocal", "attention"
std::string block_kind_name(BlockKind kind);
BlockKind parse_block_kind(const std::string& name);

// Shape-preserving map [R,C,S,S] -> [R,C,S,S].
class Block {
 public:
  virtual ~Block() = default;
  virtual BlockKind kind() const = 0;
  virtual Var forward(Tape& tape, Var x) const = 0;
};

// Plain k x k convolution with padding k/2.
class ConvBlock : public Block {
 public:
  ConvBlock(ParamStore& store, const std::string& prefix, std::int64_t channels, int kernel,
            SeededRng& rng);

  BlockKind kind() const override;
  Var forward(Tape& tape, Var x) const override;

  int kernel() const { return kernel_; }
  Parameter& weight() const { return *weight_; }
  Parameter& bias() const { return *bias_; }

 private:
  std::int64_t channels_;
  int kernel_;
  Parameter* weight_;
  Parameter* bias_;
};

// Embedded-Gaussian non-local block with a C/2 bottleneck:
//   z = W_z(softmax_j(theta(x)_i . phi(x)_j) g(x)_j) + x
// W_z starts at zero so the block starts as the identity.
class NonLocalBlock : public Block {
 public:
  NonLocalBlock(ParamStore& store, const std::string& prefix, std::int64_t channels,
                SeededRng& rng);

  BlockKind kind() const override { return BlockKind::NonLocal; }
  Var forward(Tape& tape, Var x) const override;

  Parameter& theta_weight() const { return *theta_w_; }
  Parameter& theta_bias() const { return *theta_b_; }
  Parameter& phi_weight() const { return *phi_w_; }
  Parameter& g_weight() const { return *g_w_; }
  Parameter& g_bias() const { return *g_b_; }
  Parameter& out_weight() const { return *out_w_; }
  Parameter& out_bias() const { return *out_b_; }

 private:
  std::int64_t channels_;
  Parameter *theta_w_, *theta_b_, *phi_w_, *g_w_, *g_b_, *out_w_, *out_b_;
};

// Multi-head attention driven by query content and relative position only.
// Head m at query q:
//   e(q,k) = <W_Q^m x_q, E_rel^m(k - q)>,  w = softmax_k e,
//   h(q)   = sum_k w(q,k) W_V^m x_k
// Heads are concatenated (channel m*D + d), projected by W_O (zero-initialised)
// and added to x.
class AttentionBlock : public Block {
 public:
  AttentionBlock(ParamStore& store, const std::string& prefix, std::int64_t channels, int grid,
                 int heads, SeededRng& rng);

  BlockKind kind() const override { return BlockKind::Attention; }
  Var forward(Tape& tape, Var x) const override;

  // Attention weights [R, M, S*S (query), S*S (key)].
  Var weights(Tape& tape, Var x) const;
  // Concatenated head outputs before W_O, [R,C,S,S].
  Var heads_output(Tape& tape, Var x) const;

  int heads() const { return heads_; }
  int grid() const { return grid_; }
  Parameter& query_weight() const { return *q_w_; }
  Parameter& query_bias() const { return *q_b_; }
  Parameter& rel_table() const { return *table_; }  // [M, C/M, (2S-1)^2]
  Parameter& value_weight() const { return *v_w_; }
  Parameter& value_bias() const { return *v_b_; }
  Parameter& out_weight() const { return *o_w_; }
  Parameter& out_bias() const { return *o_b_; }

 private:
  Var weights_impl(Tape& tape, Var x) const;

  std::int64_t channels_;
  int grid_;
  int heads_;
  Parameter *q_w_, *q_b_, *table_, *v_w_, *v_b_, *o_w_, *o_b_;
};

// nullptr for BlockKind::None. `grid` is the RoI output size S (used by attention).
std::unique_ptr<Block> make_block(BlockKind kind, ParamStore& store, const std::string& prefix,
                                  std::int64_t channels, int grid, int heads, SeededRng& rng);

}  // namespace groie
