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

#include <span>
#include <string>
#include <vector>

#include "dss/numerics/autograd.hpp"

namespace dss::num {

enum class OptimizerKind { kAdam, kAdamW };

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdamW;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Decoupled decay; ignored by plain Adam.
  double weight_decay = 0.01;
};

/// Moment estimates for a fixed parameter list.
struct OptimizerState {
  OptimizerConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  long step = 0;

  OptimizerState(OptimizerConfig cfg, std::span<const Var> params);
};

/// One bias-corrected Adam/AdamW update of `params` in place.
void optimizer_step(OptimizerState& state, std::span<Var> params,
                    std::span<const Tensor> grads);

/// Convenience owner of a parameter list and its state.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::vector<Var> params);

  /// Gathers gradients for every owned parameter (zeros if unused) and steps.
  void step(const Gradients& grads);

  const OptimizerState& state() const { return state_; }
  long step_count() const { return state_.step; }
  void set_learning_rate(double lr) { state_.config.learning_rate = lr; }

 private:
  std::vector<Var> params_;
  OptimizerState state_;
};

}  // namespace dss::num
