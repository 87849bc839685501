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

#include "dss/numerics/autograd.hpp"

#include <unordered_set>
#include <utility>

namespace dss::num {

Var Var::constant(Tensor value) {
  require_finite(value, "constant");
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var Var::parameter(Tensor value, std::string name) {
  require_finite(value, name.empty() ? std::string("parameter") : name);
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  node->name = std::move(name);
  return Var(std::move(node));
}

void Var::set_requires_grad(bool on) {
  if (!node_->is_leaf()) throw ContractError("set_requires_grad on a non-leaf node");
  node_->requires_grad = on;
}

void Var::assign(Tensor value) {
  if (!node_->is_leaf()) throw ContractError("assign on a non-leaf node");
  if (value.shape() != node_->value.shape()) {
    throw DimensionError("assign: " + shape_string(value.shape()) + " into " +
                         shape_string(node_->value.shape()));
  }
  require_finite(value, "assign");
  node_->value = std::move(value);
}

Var Var::from_op(std::string op, Tensor value, std::vector<Var> inputs,
                 BackwardFn backward) {
  require_finite(value, op);
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = std::move(op);
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (any) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(in.node_);
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

ComputationGraph::ComputationGraph(const Var& root) {
  if (!root || !root.requires_grad()) return;
  std::unordered_set<const Node*> visited;
  // Iterative post-order DFS; the graph is acyclic by construction since a
  // node can only reference nodes that existed before it.
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order_.push_back(node);
      stack.pop_back();
    }
  }
}

Tensor Gradients::of(const Var& v) const {
  if (const Tensor* g = find(v.node().get())) return *g;
  return Tensor::zeros(v.shape());
}

bool Gradients::contains(const Var& v) const { return find(v.node().get()) != nullptr; }

void Gradients::accumulate(const Node* node, Tensor grad) {
  auto it = grads_.find(node);
  if (it == grads_.end()) {
    grads_.emplace(node, std::move(grad));
    return;
  }
  auto dst = it->second.data();
  auto src = grad.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Gradients::release(const Node* node) { grads_.erase(node); }

const Tensor* Gradients::find(const Node* node) const {
  auto it = grads_.find(node);
  return it == grads_.end() ? nullptr : &it->second;
}

Gradients backward(const Var& loss) {
  if (!loss) throw ContractError("backward on an empty Var");
  if (loss.size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        shape_string(loss.shape()));
  }
  Gradients grads;
  if (!loss.requires_grad()) return grads;

  ComputationGraph graph(loss);
  grads.accumulate(loss.node().get(), Tensor(loss.shape(), 1.0));
  const auto& order = graph.topological_order();
  std::vector<Tensor> grad_inputs;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->is_leaf()) continue;
    const Tensor* g = grads.find(node);
    if (!g) continue;
    grad_inputs.assign(node->inputs.size(), Tensor());
    node->backward(*g, grad_inputs);
    for (std::size_t i = 0; i < node->inputs.size(); ++i) {
      const Node* in = node->inputs[i].get();
      if (!in->requires_grad || grad_inputs[i].empty()) continue;
      grads.accumulate(in, std::move(grad_inputs[i]));
    }
    grads.release(node);
  }
  return grads;
}

}  // namespace dss::num
