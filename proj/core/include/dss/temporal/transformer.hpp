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

#include <random>
#include <span>
#include <string>
#include <vector>

#include "dss/numerics/parameters.hpp"

namespace dss::temporal {

struct TransformerConfig {
  std::size_t input_dim = 0;  // fused Z_t width
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t ff_dim = 128;
  std::size_t max_positions = 16;
  std::size_t horizon = 4;
  /// Length of the optional periodic position table; 0 disables it.
  std::size_t period = 0;
};

/// Pre-norm encoder block: x + MHA(LN(x)), then + FF(LN(.)).
struct EncoderLayerParams {
  num::Var query, key, value, output, output_bias;  // [d, d] and [d]
  num::Var norm1_gain, norm1_bias, norm2_gain, norm2_bias;
  num::Var ff1_weight, ff1_bias;  // [ff, d], [ff]
  num::Var ff2_weight, ff2_bias;  // [d, ff], [d]
};

struct TransformerParams {
  std::size_t heads = 4;
  std::size_t period = 0;
  num::Var input_weight, input_bias;  // [d, input], [d]
  num::Var positions;                 // [max_positions, d]
  num::Var period_table;              // [period, d] when period > 0
  std::vector<EncoderLayerParams> layers;
  num::Var final_gain, final_bias;
  num::Var forecast_weight, forecast_bias;  // [k, d], [k]
  num::Var anomaly_weight, anomaly_bias;    // [1, d], [1]

  static TransformerParams init(const TransformerConfig& config, std::mt19937_64& rng);
  void validate() const;
  std::size_t d_model() const { return positions.shape()[1]; }
  std::size_t max_positions() const { return positions.shape()[0]; }
  std::size_t horizon() const { return forecast_bias.shape()[0]; }
  std::size_t input_dim() const { return input_weight.shape()[1]; }
  num::ParameterSet named_parameters(const std::string& prefix = "transformer") const;
};

/// Projects fused inputs [B, T, input] into the model width [B, T, d].
num::Var embed_inputs(const num::Var& fused, const TransformerParams& params);

/// Adds the learnable position table (and the periodic table, when enabled,
/// indexed by (start + t) mod period) to x [B, T, d].
num::Var positional_encode(const num::Var& x, const TransformerParams& params,
                           std::span<const std::size_t> window_starts = {});

struct AttentionResult {
  num::Var output;   // [B, T, d]
  num::Var weights;  // [B, H, T, T], rows sum to 1
};

/// softmax(Q K^T / sqrt(d_k)) V per head; heads concatenated then projected.
AttentionResult multi_head_attention(const num::Var& x, const EncoderLayerParams& layer,
                                     std::size_t heads);

struct EncodeResult {
  num::Var hidden;                        // H_T, [B, T, d]
  std::vector<num::Tensor> attention;     // per layer, [B, H, T, T]
};

/// Input projection, positional encoding, encoder stack, and final norm.
EncodeResult transformer_encode(const num::Var& fused, const TransformerParams& params,
                                std::span<const std::size_t> window_starts = {});

struct HeadOutputs {
  num::Var forecast;       // [B, k]
  num::Var anomaly_prob;   // [B, T]
};

/// Regression head on the final position plus per-step anomaly head.
HeadOutputs predict(const num::Var& hidden, const TransformerParams& params, std::size_t horizon);

}  // namespace dss::temporal
