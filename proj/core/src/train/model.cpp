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

#include "dss/train/model.hpp"

#include <json.hpp>

#include "dss/numerics/ops.hpp"
#include "dss/temporal/window.hpp"

namespace dss::train {

using num::Tensor;
using num::Var;

namespace {

using json = nlohmann::json;

Var linear(const Var& x, const Var& w, const Var& b) { return num::add(num::matmul(x, w, false, true), b); }

Var weight(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  return Var::parameter(num::glorot_uniform(rows, cols, rng));
}

Var zeros(std::size_t n) { return Var::parameter(Tensor({n}, 0.0)); }

}  // namespace

std::string to_string(ModelFamily f) { return f == ModelFamily::kHybrid ? "hybrid" : "gru"; }

ModelFamily parse_model_family(const std::string& s) {
  if (s == "hybrid") return ModelFamily::kHybrid;
  if (s == "gru") return ModelFamily::kGru;
  throw synth::ConfigError("unknown model family '" + s + "' (expected hybrid or gru)");
}

void ModelConfig::validate() const {
  if (window == 0) throw synth::ConfigError("window must be >= 1");
  if (horizon == 0) throw synth::ConfigError("horizon must be >= 1");
  if (family == ModelFamily::kHybrid) {
    if (gnn.layers == 0 || gnn.hidden_dim == 0) throw synth::ConfigError("gnn needs >= 1 layer of width >= 1");
    if (transformer.heads == 0 || transformer.d_model % transformer.heads != 0) {
      throw synth::ConfigError("d_model must be divisible by the head count");
    }
    if (transformer.max_positions < window) throw synth::ConfigError("max_positions must cover the window");
    if (transformer.layers == 0 || transformer.ff_dim == 0) throw synth::ConfigError("transformer needs layers and ff width");
  } else if (gru_hidden == 0) {
    throw synth::ConfigError("gru_hidden must be >= 1");
  }
}

std::string ModelConfig::to_json() const {
  json j;
  j["family"] = to_string(family);
  j["window"] = window;
  j["horizon"] = horizon;
  j["gnn"] = {{"hidden_dim", gnn.hidden_dim},
              {"layers", gnn.layers},
              {"negative_slope", gnn.negative_slope},
              {"neighbor_mode", gnn.neighbor_mode == graph::NeighborMode::kIncoming ? "incoming" : "symmetric"}};
  j["transformer"] = {{"d_model", transformer.d_model}, {"heads", transformer.heads},
                      {"layers", transformer.layers},   {"ff_dim", transformer.ff_dim},
                      {"max_positions", transformer.max_positions}, {"period", transformer.period}};
  j["gru_hidden"] = gru_hidden;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  ModelConfig c;
  try {
    const json j = json::parse(text);
    c.family = parse_model_family(j.at("family").get<std::string>());
    c.window = j.at("window").get<std::size_t>();
    c.horizon = j.at("horizon").get<std::size_t>();
    const json& g = j.at("gnn");
    c.gnn.hidden_dim = g.at("hidden_dim").get<std::size_t>();
    c.gnn.layers = g.at("layers").get<std::size_t>();
    c.gnn.negative_slope = g.at("negative_slope").get<double>();
    const auto mode = g.at("neighbor_mode").get<std::string>();
    if (mode == "incoming") c.gnn.neighbor_mode = graph::NeighborMode::kIncoming;
    else if (mode == "symmetric") c.gnn.neighbor_mode = graph::NeighborMode::kSymmetric;
    else throw synth::ConfigError("unknown neighbor_mode '" + mode + "'");
    const json& t = j.at("transformer");
    c.transformer.d_model = t.at("d_model").get<std::size_t>();
    c.transformer.heads = t.at("heads").get<std::size_t>();
    c.transformer.layers = t.at("layers").get<std::size_t>();
    c.transformer.ff_dim = t.at("ff_dim").get<std::size_t>();
    c.transformer.max_positions = t.at("max_positions").get<std::size_t>();
    c.transformer.period = t.at("period").get<std::size_t>();
    c.gru_hidden = j.at("gru_hidden").get<std::size_t>();
  } catch (const json::exception& e) {
    throw synth::ConfigError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

GruParams GruParams::init(std::size_t x, std::size_t h, std::size_t k, std::mt19937_64& rng) {
  GruParams p;
  p.input_update = weight(h, x, rng);
  p.input_reset = weight(h, x, rng);
  p.input_candidate = weight(h, x, rng);
  p.hidden_update = weight(h, h, rng);
  p.hidden_reset = weight(h, h, rng);
  p.hidden_candidate = weight(h, h, rng);
  p.bias_update = zeros(h);
  p.bias_reset = zeros(h);
  p.bias_candidate = zeros(h);
  p.forecast_weight = weight(k, h, rng);
  p.forecast_bias = zeros(k);
  p.anomaly_weight = weight(1, h, rng);
  p.anomaly_bias = zeros(1);
  return p;
}

num::ParameterSet GruParams::named_parameters(const std::string& prefix) const {
  num::ParameterSet s;
  const std::string b = prefix + ".";
  s.add(b + "input_update", input_update);
  s.add(b + "input_reset", input_reset);
  s.add(b + "input_candidate", input_candidate);
  s.add(b + "hidden_update", hidden_update);
  s.add(b + "hidden_reset", hidden_reset);
  s.add(b + "hidden_candidate", hidden_candidate);
  s.add(b + "bias_update", bias_update);
  s.add(b + "bias_reset", bias_reset);
  s.add(b + "bias_candidate", bias_candidate);
  s.add(b + "forecast_weight", forecast_weight);
  s.add(b + "forecast_bias", forecast_bias);
  s.add(b + "anomaly_weight", anomaly_weight);
  s.add(b + "anomaly_bias", anomaly_bias);
  return s;
}

GruOutputs gru_forward(const Var& exogenous, const GruParams& p) {
  const auto& s = exogenous.shape();
  if (s.size() != 3 || s[2] != p.input_update.shape()[1]) {
    throw num::DimensionError("gru input " + num::shape_string(s) + " does not match weights " +
                              num::shape_string(p.input_update.shape()));
  }
  const std::size_t b = s[0], steps = s[1], x = s[2], h = p.hidden_update.shape()[0];
  Var state = Var::constant(Tensor({b, h}));
  std::vector<Var> logits;
  for (std::size_t t = 0; t < steps; ++t) {
    Var xt = num::reshape(num::slice(exogenous, 1, t, t + 1), {b, x});
    Var z = num::sigmoid(linear(xt, p.input_update, p.bias_update) + num::matmul(state, p.hidden_update, false, true));
    Var r = num::sigmoid(linear(xt, p.input_reset, p.bias_reset) + num::matmul(state, p.hidden_reset, false, true));
    Var n = num::tanh(linear(xt, p.input_candidate, p.bias_candidate) +
                      r * num::matmul(state, p.hidden_candidate, false, true));
    state = n + z * (state - n);
    logits.push_back(linear(state, p.anomaly_weight, p.anomaly_bias));
  }
  GruOutputs out;
  out.forecast = linear(state, p.forecast_weight, p.forecast_bias);
  out.anomaly_prob = num::sigmoid(num::concat(logits, 1));
  return out;
}

Model Model::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Model m;
  m.config_ = config;
  std::mt19937_64 rng(seed);
  if (config.family == ModelFamily::kHybrid) {
    graph::GnnConfig g = config.gnn;
    g.input_dim = kNodeFeatureDim;
    m.gnn_ = graph::GnnParams::init(g, rng);
    temporal::TransformerConfig t = config.transformer;
    t.input_dim = m.gnn_.output_dim() + config.exogenous_dim();
    t.horizon = config.horizon;
    m.transformer_ = temporal::TransformerParams::init(t, rng);
  } else {
    m.gru_ = GruParams::init(config.exogenous_dim(), config.gru_hidden, config.horizon, rng);
  }
  return m;
}

ModelOutput Model::forward(const Batch& batch, bool trace_graph) const {
  if (batch.window != config_.window || batch.horizon != config_.horizon) {
    throw num::DimensionError("batch window/horizon (" + std::to_string(batch.window) + ", " +
                              std::to_string(batch.horizon) + ") do not match the model (" +
                              std::to_string(config_.window) + ", " + std::to_string(config_.horizon) + ")");
  }
  ModelOutput out;
  Var exo = Var::constant(batch.exogenous);
  if (config_.family == ModelFamily::kGru) {
    auto r = gru_forward(exo, gru_);
    out.forecast = r.forecast;
    out.anomaly_prob = r.anomaly_prob;
    return out;
  }
  if (!batch.edges) throw num::ContractError("hybrid model needs a batch built with graph features");
  Var hg = graph::encode_graph(Var::constant(batch.node_features), *batch.edges, gnn_,
                               trace_graph ? &out.graph_trace : nullptr);
  Var fused = temporal::fuse_sequence(hg, exo);
  auto enc = temporal::transformer_encode(fused, transformer_, batch.starts);
  auto heads = temporal::predict(enc.hidden, transformer_, config_.horizon);
  out.forecast = heads.forecast;
  out.anomaly_prob = heads.anomaly_prob;
  out.attention = std::move(enc.attention);
  return out;
}

num::ParameterSet Model::parameters() const {
  if (config_.family == ModelFamily::kGru) return gru_.named_parameters();
  num::ParameterSet s = gnn_.named_parameters();
  s.append(transformer_.named_parameters());
  return s;
}

std::vector<Tensor> Model::snapshot() const {
  std::vector<Tensor> out;
  for (const auto& v : parameters().vars()) out.push_back(v.value());
  return out;
}

void Model::restore(const std::vector<Tensor>& values) {
  auto params = parameters().vars();
  if (params.size() != values.size()) throw num::ContractError("snapshot does not match the model");
  for (std::size_t i = 0; i < params.size(); ++i) params[i].assign(values[i]);
}

void Model::quantize_to_float() {
  for (auto v : parameters().vars()) {
    Tensor t = v.value();
    for (double& x : t.data()) x = static_cast<double>(static_cast<float>(x));
    v.assign(std::move(t));
  }
}

}  // namespace dss::train
