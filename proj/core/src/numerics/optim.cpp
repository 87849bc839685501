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

#include "dss/numerics/optim.hpp"

#include <cmath>

namespace dss::num {

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "adamw") return OptimizerKind::kAdamW;
  throw ContractError("unknown optimizer '" + name + "' (expected adam or adamw)");
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "adamw";
}

OptimizerState::OptimizerState(OptimizerConfig cfg, std::span<const Var> params)
    : config(cfg) {
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const auto& p : params) {
    first_moment.emplace_back(p.shape());
    second_moment.emplace_back(p.shape());
  }
}

void optimizer_step(OptimizerState& state, std::span<Var> params,
                    std::span<const Tensor> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("optimizer_step: " + std::to_string(params.size()) + " params, " +
                         std::to_string(grads.size()) + " grads, " +
                         std::to_string(state.first_moment.size()) + " moment slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape() ||
        params[i].shape() != state.first_moment[i].shape()) {
      throw DimensionError("optimizer_step: parameter " + std::to_string(i) + " shape " +
                           shape_string(params[i].shape()) + " vs gradient " +
                           shape_string(grads[i].shape()));
    }
  }
  const OptimizerConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const bool decoupled = c.kind == OptimizerKind::kAdamW && c.weight_decay != 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor value = params[i].value();
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < value.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      if (decoupled) value[k] *= 1.0 - c.learning_rate * c.weight_decay;
      value[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
    params[i].assign(std::move(value));
  }
}

Optimizer::Optimizer(OptimizerConfig config, std::vector<Var> params)
    : params_(std::move(params)), state_(config, params_) {}

void Optimizer::step(const Gradients& grads) {
  std::vector<Tensor> g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.push_back(grads.of(p));
  optimizer_step(state_, params_, g);
}

}  // namespace dss::num
