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

#include <cstdint>
#include <string>
#include <vector>

#include "dss/graph/gnn.hpp"
#include "dss/temporal/transformer.hpp"
#include "dss/train/features.hpp"

namespace dss::train {

enum class ModelFamily { kHybrid, kGru };

std::string to_string(ModelFamily f);
ModelFamily parse_model_family(const std::string& s);  // throws synth::ConfigError

struct ModelConfig {
  ModelFamily family = ModelFamily::kHybrid;
  std::size_t window = 16;
  std::size_t horizon = 4;
  graph::GnnConfig gnn;                  // input_dim is forced to kNodeFeatureDim
  temporal::TransformerConfig transformer;  // input_dim is derived
  std::size_t gru_hidden = 32;

  void validate() const;
  std::size_t exogenous_dim() const { return exogenous_columns().size(); }
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

/// Single-layer GRU over the exogenous streams: forecast from the last state,
/// anomaly probability from every state.
struct GruParams {
  num::Var input_update, input_reset, input_candidate;              // [h, x]
  num::Var hidden_update, hidden_reset, hidden_candidate;           // [h, h]
  num::Var bias_update, bias_reset, bias_candidate;                 // [h]
  num::Var forecast_weight, forecast_bias;                          // [k, h], [k]
  num::Var anomaly_weight, anomaly_bias;                            // [1, h], [1]

  static GruParams init(std::size_t input_dim, std::size_t hidden, std::size_t horizon, std::mt19937_64& rng);
  num::ParameterSet named_parameters(const std::string& prefix = "gru") const;
};

struct GruOutputs {
  num::Var forecast;      // [B, k]
  num::Var anomaly_prob;  // [B, T]
};
GruOutputs gru_forward(const num::Var& exogenous, const GruParams& params);

struct ModelOutput {
  num::Var forecast;                   // [B, k] normalized
  num::Var anomaly_prob;               // [B, T]
  std::vector<num::Tensor> attention;  // hybrid only: per layer [B, H, T, T]
  graph::GnnTrace graph_trace;         // hybrid only, when requested
};

class Model {
 public:
  Model() = default;
  static Model init(const ModelConfig& config, std::uint64_t seed);

  ModelOutput forward(const Batch& batch, bool trace_graph = false) const;
  num::ParameterSet parameters() const;
  const ModelConfig& config() const { return config_; }
  bool uses_graph() const { return config_.family == ModelFamily::kHybrid; }

  /// Copies of the current parameter values, in parameters() order.
  std::vector<num::Tensor> snapshot() const;
  void restore(const std::vector<num::Tensor>& values);
  /// Rounds every parameter to the nearest float so a 32-bit checkpoint is exact.
  void quantize_to_float();

 private:
  ModelConfig config_;
  graph::GnnParams gnn_;
  temporal::TransformerParams transformer_;
  GruParams gru_;
};

}  // namespace dss::train
