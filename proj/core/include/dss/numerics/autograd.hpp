// Copyright 2026 The DSS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "dss/numerics/tensor.hpp"

namespace dss::num {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// Backward rule of a primitive: receives dL/d(output) and fills one gradient
/// per input. Entries left empty mean "no contribution".
using BackwardFn =
    std::function<void(const Tensor& grad_output, std::vector<Tensor>& grad_inputs)>;

/// One recorded primitive application: the cached output value plus the
/// information needed to propagate gradients to its inputs.
struct Node {
  Tensor value;
  bool requires_grad = false;
  std::string op = "leaf";
  std::string name;
  std::vector<NodePtr> inputs;
  BackwardFn backward;

  bool is_leaf() const { return inputs.empty(); }
};

/// Handle to a node in a dynamically recorded computation graph.
class Var {
 public:
  Var() = default;

  /// A value that never receives gradients.
  static Var constant(Tensor value);
  /// A trainable leaf.
  static Var parameter(Tensor value, std::string name = {});

  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::string& name() const { return node_->name; }
  const std::string& op() const { return node_->op; }

  /// Freeze or unfreeze a leaf. Only valid on leaves.
  void set_requires_grad(bool on);
  /// Replace a leaf's value in place (optimizer updates, perturbation).
  void assign(Tensor value);

  const NodePtr& node() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

  /// Internal: wrap a primitive result. Records inputs only when any input
  /// requires gradients.
  static Var from_op(std::string op, Tensor value, std::vector<Var> inputs,
                     BackwardFn backward);

 private:
  explicit Var(NodePtr node) : node_(std::move(node)) {}
  NodePtr node_;
};

/// Topologically ordered view of the nodes that influence a root. Built by
/// depth-first search; contains each reachable gradient-carrying node once.
class ComputationGraph {
 public:
  explicit ComputationGraph(const Var& root);

  /// Inputs before consumers; the root is last.
  const std::vector<Node*>& topological_order() const { return order_; }
  std::size_t size() const { return order_.size(); }

 private:
  std::vector<Node*> order_;
};

/// Gradient map keyed by node identity.
class Gradients {
 public:
  /// Gradient w.r.t. `v`; a zero tensor of v's shape when v was not reached.
  Tensor of(const Var& v) const;
  bool contains(const Var& v) const;
  std::size_t size() const { return grads_.size(); }

  void accumulate(const Node* node, Tensor grad);
  const Tensor* find(const Node* node) const;
  /// Drops an interior node's gradient once it has been propagated.
  void release(const Node* node);

 private:
  std::unordered_map<const Node*, Tensor> grads_;
};

/// Reverse-mode sweep from a scalar loss. Gradients of a node shared by
/// several consumers are summed.
Gradients backward(const Var& loss);

}  // namespace dss::num
