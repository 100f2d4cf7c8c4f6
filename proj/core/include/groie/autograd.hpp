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
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "groie/rng.hpp"
#include "groie/tensor.hpp"

namespace groie {

// A trainable value together with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value; filled by Tape::backward with +=

  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
  void zero_grad() { grad.fill(0.0); }
};

// Owns the parameters of one model. Names are unique; addresses are stable.
class ParamStore {
 public:
  Parameter& add(const std::string& name, Tensor value);
  // uniform(+-sqrt(6/(fan_in+fan_out)))
  Parameter& add_xavier(const std::string& name, Shape shape, std::int64_t fan_in,
                        std::int64_t fan_out, SeededRng& rng);
  Parameter& add_zeros(const std::string& name, Shape shape);

  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }
  std::int64_t total_elements() const;

  void zero_grad();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.cbegin(); }
  auto end() const { return params_.cend(); }

  std::vector<Parameter*> pointers();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

class Tape;

// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::int64_t dim(int axis) const { return value().dim(axis); }
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Dynamically recorded operation tape for reverse-mode differentiation.
// Reset explicitly with clear() between training steps.
class Tape {
 public:
  using BackwardFn =
      std::function<void(Tape&, const Tensor& out_value, const Tensor& grad_out)>;

  Var constant(Tensor value);
  Var param(Parameter& p);

  // Records an op result. parents are the inputs whose gradients backward_fn
  // may write; the node requires grad iff any parent does.
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward_fn);
  Var record(Tensor value, const std::vector<Var>& parents, BackwardFn backward_fn);

  // Seeds d(out)/d(out) = 1 and propagates to every reachable node; parameter
  // leaves add their gradient into Parameter::grad.
  void backward(Var out);

  void clear();

  const Tensor& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  bool requires_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].requires_grad; }
  // Gradient buffer of a node, allocated (zeroed) on first access.
  Tensor& grad(Var v);
  const Tensor* grad_if_any(Var v) const;

  std::size_t size() const { return nodes_.size(); }

  // Multiply-accumulate count recorded by ops during forward.
  std::int64_t flops() const { return flops_; }
  void add_flops(std::int64_t n) { flops_ += n; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;  // deque: value() references stay valid as the tape grows
  std::int64_t flops_ = 0;
};

}  // namespace groie
