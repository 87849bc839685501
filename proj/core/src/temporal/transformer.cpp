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

#include "dss/temporal/transformer.hpp"

#include <cmath>

#include "dss/numerics/ops.hpp"

namespace dss::temporal {

using num::Shape;
using num::Tensor;
using num::Var;

namespace {

Var weight(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  return Var::parameter(num::glorot_uniform(rows, cols, rng));
}

Var filled(std::size_t n, double value) { return Var::parameter(Tensor({n}, value)); }

// x [..., in] * W^T + b with W [out, in].
Var linear(const Var& x, const Var& w, const Var& b) {
  return num::add(num::matmul(x, w, false, true), b);
}

void require_shape(const Var& v, const Shape& expected, const std::string& what) {
  if (v.shape() != expected) {
    throw num::DimensionError("transformer " + what + ": expected " + num::shape_string(expected) +
                              ", got " + num::shape_string(v.shape()));
  }
}

}  // namespace

TransformerParams TransformerParams::init(const TransformerConfig& c, std::mt19937_64& rng) {
  if (c.input_dim == 0) throw num::ContractError("transformer input_dim must be positive");
  if (c.heads == 0 || c.d_model % c.heads != 0) {
    throw num::ContractError("d_model " + std::to_string(c.d_model) + " not divisible by " +
                             std::to_string(c.heads) + " heads");
  }
  if (c.horizon == 0) throw num::ContractError("forecast horizon must be >= 1");
  const std::size_t d = c.d_model;
  TransformerParams p;
  p.heads = c.heads;
  p.period = c.period;
  p.input_weight = weight(d, c.input_dim, rng);
  p.input_bias = filled(d, 0.0);
  p.positions = Var::parameter(Tensor::randn({c.max_positions, d}, rng, 0.02));
  if (c.period > 0) p.period_table = Var::parameter(Tensor::randn({c.period, d}, rng, 0.02));
  for (std::size_t l = 0; l < c.layers; ++l) {
    EncoderLayerParams layer;
    layer.query = weight(d, d, rng);
    layer.key = weight(d, d, rng);
    layer.value = weight(d, d, rng);
    layer.output = weight(d, d, rng);
    layer.output_bias = filled(d, 0.0);
    layer.norm1_gain = filled(d, 1.0);
    layer.norm1_bias = filled(d, 0.0);
    layer.norm2_gain = filled(d, 1.0);
    layer.norm2_bias = filled(d, 0.0);
    layer.ff1_weight = weight(c.ff_dim, d, rng);
    layer.ff1_bias = filled(c.ff_dim, 0.0);
    layer.ff2_weight = weight(d, c.ff_dim, rng);
    layer.ff2_bias = filled(d, 0.0);
    p.layers.push_back(std::move(layer));
  }
  p.final_gain = filled(d, 1.0);
  p.final_bias = filled(d, 0.0);
  p.forecast_weight = weight(c.horizon, d, rng);
  p.forecast_bias = filled(c.horizon, 0.0);
  p.anomaly_weight = weight(1, d, rng);
  p.anomaly_bias = filled(1, 0.0);
  return p;
}

void TransformerParams::validate() const {
  const std::size_t d = d_model();
  if (heads == 0 || d % heads != 0) {
    throw num::DimensionError("d_model " + std::to_string(d) + " not divisible by " +
                              std::to_string(heads) + " heads");
  }
  require_shape(input_bias, {d}, "input_bias");
  if (input_weight.shape().size() != 2 || input_weight.shape()[0] != d) {
    throw num::DimensionError("transformer input_weight has shape " +
                              num::shape_string(input_weight.shape()));
  }
  if (period > 0) require_shape(period_table, {period, d}, "period_table");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    const std::string tag = "layer " + std::to_string(l);
    for (const Var* w : {&L.query, &L.key, &L.value, &L.output}) require_shape(*w, {d, d}, tag);
    for (const Var* v : {&L.output_bias, &L.norm1_gain, &L.norm1_bias, &L.norm2_gain,
                         &L.norm2_bias, &L.ff2_bias}) {
      require_shape(*v, {d}, tag);
    }
    const std::size_t ff = L.ff1_bias.shape().at(0);
    require_shape(L.ff1_weight, {ff, d}, tag + " ff1");
    require_shape(L.ff2_weight, {d, ff}, tag + " ff2");
  }
  require_shape(final_gain, {d}, "final_gain");
  require_shape(final_bias, {d}, "final_bias");
  const std::size_t k = forecast_bias.shape().at(0);
  require_shape(forecast_weight, {k, d}, "forecast_weight");
  require_shape(anomaly_weight, {1, d}, "anomaly_weight");
  require_shape(anomaly_bias, {1}, "anomaly_bias");
}

num::ParameterSet TransformerParams::named_parameters(const std::string& prefix) const {
  num::ParameterSet set;
  const std::string p = prefix + ".";
  set.add(p + "input_weight", input_weight);
  set.add(p + "input_bias", input_bias);
  set.add(p + "positions", positions);
  if (period > 0) set.add(p + "period_table", period_table);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    const std::string b = p + "layer" + std::to_string(l) + ".";
    set.add(b + "query", L.query);
    set.add(b + "key", L.key);
    set.add(b + "value", L.value);
    set.add(b + "output", L.output);
    set.add(b + "output_bias", L.output_bias);
    set.add(b + "norm1_gain", L.norm1_gain);
    set.add(b + "norm1_bias", L.norm1_bias);
    set.add(b + "norm2_gain", L.norm2_gain);
    set.add(b + "norm2_bias", L.norm2_bias);
    set.add(b + "ff1_weight", L.ff1_weight);
    set.add(b + "ff1_bias", L.ff1_bias);
    set.add(b + "ff2_weight", L.ff2_weight);
    set.add(b + "ff2_bias", L.ff2_bias);
  }
  set.add(p + "final_gain", final_gain);
  set.add(p + "final_bias", final_bias);
  set.add(p + "forecast_weight", forecast_weight);
  set.add(p + "forecast_bias", forecast_bias);
  set.add(p + "anomaly_weight", anomaly_weight);
  set.add(p + "anomaly_bias", anomaly_bias);
  return set;
}

Var embed_inputs(const Var& fused, const TransformerParams& params) {
  const Shape& s = fused.shape();
  if (s.size() != 3 || s[2] != params.input_dim()) {
    throw num::DimensionError("transformer input " + num::shape_string(s) +
                              " does not match input width " +
                              std::to_string(params.input_dim()));
  }
  return linear(fused, params.input_weight, params.input_bias);
}

Var positional_encode(const Var& x, const TransformerParams& params,
                      std::span<const std::size_t> window_starts) {
  const Shape& s = x.shape();
  if (s.size() != 3 || s[2] != params.d_model()) {
    throw num::DimensionError("positional_encode: input " + num::shape_string(s) +
                              " does not match d_model " + std::to_string(params.d_model()));
  }
  const std::size_t steps = s[1];
  if (steps > params.max_positions()) {
    throw num::ContractError("window of " + std::to_string(steps) +
                             " steps exceeds positional table capacity " +
                             std::to_string(params.max_positions()));
  }
  Var encoded = num::add(x, num::slice(params.positions, 0, 0, steps));
  if (params.period > 0) {
    const std::size_t batch = s[0];
    std::vector<std::size_t> rows(batch * steps);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t start = b < window_starts.size() ? window_starts[b] : 0;
      for (std::size_t t = 0; t < steps; ++t) rows[b * steps + t] = (start + t) % params.period;
    }
    Var periodic = num::reshape(num::gather_rows(params.period_table, num::make_index(rows)),
                                {batch, steps, params.d_model()});
    encoded = num::add(encoded, periodic);
  }
  return encoded;
}

AttentionResult multi_head_attention(const Var& x, const EncoderLayerParams& layer,
                                     std::size_t heads) {
  const Shape& s = x.shape();
  if (s.size() != 3) throw num::DimensionError("attention input must be [B, T, d], got " +
                                               num::shape_string(s));
  const std::size_t batch = s[0], steps = s[1], d = s[2];
  if (heads == 0 || d % heads != 0) {
    throw num::DimensionError("attention: width " + std::to_string(d) + " not divisible by " +
                              std::to_string(heads) + " heads");
  }
  if (layer.query.shape() != Shape{d, d}) {
    throw num::DimensionError("attention: projection " + num::shape_string(layer.query.shape()) +
                              " does not match input " + num::shape_string(s));
  }
  const std::size_t dk = d / heads;
  auto split_heads = [&](const Var& w) {
    Var projected = num::matmul(x, w, false, true);
    return num::permute(num::reshape(projected, {batch, steps, heads, dk}), {0, 2, 1, 3});
  };
  Var q = split_heads(layer.query);
  Var k = split_heads(layer.key);
  Var v = split_heads(layer.value);
  Var scores = num::scale(num::matmul(q, k, false, true), 1.0 / std::sqrt(static_cast<double>(dk)));
  Var weights = num::softmax(scores, 3);
  Var context = num::matmul(weights, v);
  Var merged = num::reshape(num::permute(context, {0, 2, 1, 3}), {batch, steps, d});
  return {linear(merged, layer.output, layer.output_bias), weights};
}

EncodeResult transformer_encode(const Var& fused, const TransformerParams& params,
                                std::span<const std::size_t> window_starts) {
  params.validate();
  Var h = positional_encode(embed_inputs(fused, params), params, window_starts);
  EncodeResult result;
  for (const auto& layer : params.layers) {
    AttentionResult attn =
        multi_head_attention(num::layer_norm(h, layer.norm1_gain, layer.norm1_bias), layer,
                             params.heads);
    result.attention.push_back(attn.weights.value());
    h = num::add(h, attn.output);
    Var ff = linear(num::relu(linear(num::layer_norm(h, layer.norm2_gain, layer.norm2_bias),
                                     layer.ff1_weight, layer.ff1_bias)),
                    layer.ff2_weight, layer.ff2_bias);
    h = num::add(h, ff);
  }
  result.hidden = num::layer_norm(h, params.final_gain, params.final_bias);
  return result;
}

HeadOutputs predict(const Var& hidden, const TransformerParams& params, std::size_t horizon) {
  if (horizon == 0) throw num::ContractError("forecast horizon must be >= 1");
  if (horizon != params.horizon()) {
    throw num::ContractError("requested horizon " + std::to_string(horizon) +
                             " but the regression head emits " +
                             std::to_string(params.horizon()));
  }
  const Shape& s = hidden.shape();
  if (s.size() != 3) throw num::DimensionError("predict expects [B, T, d], got " +
                                               num::shape_string(s));
  const std::size_t batch = s[0], steps = s[1], d = s[2];
  Var last = num::reshape(num::slice(hidden, 1, steps - 1, steps), {batch, d});
  HeadOutputs out;
  out.forecast = linear(last, params.forecast_weight, params.forecast_bias);
  Var logits = num::reshape(linear(hidden, params.anomaly_weight, params.anomaly_bias),
                            {batch, steps});
  out.anomaly_prob = num::sigmoid(logits);
  return out;
}

}  // namespace dss::temporal
