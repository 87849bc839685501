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
#include <vector>

#include "dss/numerics/ops.hpp"

namespace dss::temporal {

class AlignmentError : public num::DimensionError {
 public:
  using num::DimensionError::DimensionError;
};

/// Fused per-step inputs Z_t = [H_g || X^(a)_t || X^(c)_t] for one window.
struct SequenceWindow {
  num::Tensor fused;      // [T_w, dim]
  std::size_t start = 0;  // absolute index of the first step

  std::size_t length() const { return fused.shape().at(0); }
  std::size_t dim() const { return fused.shape().at(1); }
};

/// Concatenates the graph embedding (repeated per step) with the ad and
/// consumer streams. Streams must be [T, *] with equal T.
SequenceWindow build_window(std::span<const double> graph_embedding, const num::Tensor& ad,
                            const num::Tensor& consumer, std::size_t start = 0);

/// Start indices of every full window of `window` steps taken every `stride`
/// steps from a stream of `length` steps.
std::vector<std::size_t> window_starts(std::size_t length, std::size_t window, std::size_t stride);

/// Batched, differentiable fusion: graph [B, g] repeated over T and joined
/// with exogenous [B, T, x] into [B, T, g + x].
num::Var fuse_sequence(const num::Var& graph_embedding, const num::Var& exogenous);

/// Forecast for one window.
struct ForecastResult {
  std::size_t horizon = 0;
  std::vector<double> values;             // y_hat_{t+1..t+k}
  std::vector<double> anomaly_probs;      // per input step, in [0,1]
  std::vector<num::Tensor> attention;     // last layer, per head [T_w, T_w]
  std::size_t window_end = 0;             // t
};

}  // namespace dss::temporal
