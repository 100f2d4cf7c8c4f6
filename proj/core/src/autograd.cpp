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

#include "groie/autograd.hpp"

#include <cmath>

#include "groie/errors.hpp"

namespace groie {

Parameter& ParamStore::add(const std::string& name, Tensor value) {
  if (find(name) != nullptr) throw ConfigError("duplicate parameter name: " + name);
  params_.push_back(std::make_unique<Parameter>(name, std::move(value)));
  return *params_.back();
}

Parameter& ParamStore::add_xavier(const std::string& name, Shape shape, std::int64_t fan_in,
                                  std::int64_t fan_out, SeededRng& rng) {
  Tensor t(std::move(shape));
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& x : t.data()) x = rng.uniform(-bound, bound);
  return add(name, std::move(t));
}

Parameter& ParamStore::add_zeros(const std::string& name, Shape shape) {
  return add(name, Tensor(std::move(shape)));
}

Parameter* ParamStore::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParamStore::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

std::int64_t ParamStore::total_elements() const {
  std::int64_t n = 0;
  for (const auto& p : params_) n += p->value.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::vector<Parameter*> ParamStore::pointers() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward_fn) {
  return record(std::move(value), std::vector<Var>(parents), std::move(backward_fn));
}

Var Tape::record(Tensor value, const std::vector<Var>& parents, BackwardFn backward_fn) {
  Node n;
  n.value = std::move(value);
  for (const Var& p : parents) {
    if (p.tape != this) throw UsageError("op input recorded on a different tape");
    n.requires_grad = n.requires_grad || nodes_[static_cast<std::size_t>(p.id)].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward_fn);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad(Var v) {
  Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (n.grad.numel() != n.value.numel() || n.grad.shape() != n.value.shape()) {
    n.grad = Tensor(n.value.shape());
  }
  return n.grad;
}

const Tensor* Tape::grad_if_any(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (n.grad.shape() != n.value.shape() || n.grad.numel() != n.value.numel()) return nullptr;
  return &n.grad;
}

void Tape::backward(Var out) {
  if (out.tape != this) throw UsageError("backward: output belongs to a different tape");
  if (value(out).numel() != 1) {
    throw UsageError("backward requires a scalar output, got shape " + shape_str(value(out).shape()));
  }
  for (auto& n : nodes_) n.grad = Tensor();
  grad(out)[0] = 1.0;
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || n.grad.empty()) continue;
    // Backward closures never record nodes, so n stays valid.
    if (n.backward) n.backward(*this, n.value, n.grad);
    if (n.param != nullptr) {
      auto dst = n.param->grad.data();
      auto src = n.grad.data();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  }
}

void Tape::clear() {
  nodes_.clear();
  flops_ = 0;
}

}  // namespace groie
