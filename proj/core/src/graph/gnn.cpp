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

#include "dss/graph/gnn.hpp"

#include <cmath>

namespace dss::graph {

using num::Shape;
using num::Tensor;
using num::Var;

GnnParams GnnParams::init(const GnnConfig& config, std::mt19937_64& rng) {
  if (config.layers < 1) throw num::ContractError("GNN needs at least one layer");
  GnnParams p;
  p.negative_slope = config.negative_slope;
  std::size_t in = config.input_dim;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::size_t out = config.hidden_dim;
    GnnLayerParams layer;
    layer.self_weight = Var::parameter(num::glorot_uniform(out, in, rng));
    layer.neighbor_weight = Var::parameter(num::glorot_uniform(out, in, rng));
    const double limit = std::sqrt(6.0 / static_cast<double>(2 * out + 1));
    layer.attention = Var::parameter(Tensor::uniform({2 * out}, rng, -limit, limit));
    p.layers.push_back(std::move(layer));
    in = out;
  }
  return p;
}

void GnnParams::validate() const {
  if (layers.empty()) throw num::ContractError("GNN needs at least one layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const Shape& ws = layer.self_weight.shape();
    if (ws.size() != 2 || layer.neighbor_weight.shape() != ws ||
        layer.attention.shape() != Shape{2 * ws[0]}) {
      throw num::DimensionError("GNN layer " + std::to_string(l) + ": inconsistent weight shapes " +
                                num::shape_string(ws) + ", " +
                                num::shape_string(layer.neighbor_weight.shape()) + ", " +
                                num::shape_string(layer.attention.shape()));
    }
    if (l > 0 && layers[l - 1].out_dim() != layer.in_dim()) {
      throw num::DimensionError("GNN layer " + std::to_string(l) + " expects input dim " +
                                std::to_string(layer.in_dim()) + " but layer " +
                                std::to_string(l - 1) + " produces " +
                                std::to_string(layers[l - 1].out_dim()));
    }
  }
}

num::ParameterSet GnnParams::named_parameters(const std::string& prefix) const {
  num::ParameterSet set;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l) + ".";
    set.add(base + "self_weight", layers[l].self_weight);
    set.add(base + "neighbor_weight", layers[l].neighbor_weight);
    set.add(base + "attention", layers[l].attention);
  }
  return set;
}

namespace {

void check_input(const GnnLayerParams& layer, const Var& h, const MessageEdges& edges,
                 std::size_t layer_index) {
  const Shape& s = h.shape();
  if (s.size() != 2 || s[1] != layer.in_dim()) {
    throw num::DimensionError("GNN layer " + std::to_string(layer_index) + ": embeddings " +
                              num::shape_string(s) + " do not match weight " +
                              num::shape_string(layer.self_weight.shape()));
  }
  if (s[0] != edges.node_count()) {
    throw num::DimensionError("GNN layer " + std::to_string(layer_index) + ": " +
                              std::to_string(s[0]) + " embedding rows for " +
                              std::to_string(edges.node_count()) + " nodes");
  }
}

// Projected messages W_neigh h and edge attention from them.
Var edge_alpha(const GnnLayerParams& layer, const Var& messages, const MessageEdges& edges,
               double slope) {
  const std::size_t out = layer.out_dim();
  const std::size_t n = edges.node_count();
  Var a_recv = num::reshape(num::slice(layer.attention, 0, 0, out), {out, 1});
  Var a_send = num::reshape(num::slice(layer.attention, 0, out, 2 * out), {out, 1});
  Var s_recv = num::reshape(num::matmul(messages, a_recv), {n});
  Var s_send = num::reshape(num::matmul(messages, a_send), {n});
  Var scores = num::leaky_relu(
      num::add(num::gather_rows(s_recv, edges.receiver), num::gather_rows(s_send, edges.sender)),
      slope);
  return num::segment_softmax(scores, edges.receiver, n);
}

}  // namespace

Var attention_coefficients(const GnnLayerParams& layer, const Var& embeddings,
                           const MessageEdges& edges, double negative_slope) {
  check_input(layer, embeddings, edges, 0);
  Var messages = num::matmul(embeddings, layer.neighbor_weight, false, true);
  return edge_alpha(layer, messages, edges, negative_slope);
}

Tensor dense_attention(const Tensor& alpha, const MessageEdges& edges) {
  const std::size_t n = edges.nodes_per_graph;
  Tensor dense({n, n});
  for (std::size_t e = 0; e < edges.edge_count(); ++e) {
    const std::size_t i = (*edges.receiver)[e];
    const std::size_t j = (*edges.sender)[e];
    if (i < n && j < n) dense.at(i, j) = alpha[e];
  }
  return dense;
}

Var gnn_layer(const Var& embeddings, const MessageEdges& edges, const GnnLayerParams& layer,
              std::size_t layer_index, double negative_slope, Tensor* alpha_out) {
  check_input(layer, embeddings, edges, layer_index);
  const std::size_t n = edges.node_count();
  Var self_term = num::matmul(embeddings, layer.self_weight, false, true);
  Var messages = num::matmul(embeddings, layer.neighbor_weight, false, true);
  if (edges.edge_count() == 0) {
    if (alpha_out) *alpha_out = Tensor({0});
    return num::relu(self_term);
  }
  Var alpha = edge_alpha(layer, messages, edges, negative_slope);
  if (alpha_out) *alpha_out = alpha.value();
  Var aggregated = num::edge_aggregate(alpha, messages, edges.receiver, edges.sender, n);
  return num::relu(num::add(self_term, aggregated));
}

Var readout(const Var& embeddings, std::size_t graph_count) {
  const Shape& s = embeddings.shape();
  if (s.size() != 2 || graph_count == 0 || s[0] == 0) {
    throw num::ContractError("readout needs a non-empty [nodes, dim] embedding matrix, got " +
                             num::shape_string(s));
  }
  if (s[0] % graph_count != 0) {
    throw num::DimensionError("readout: " + std::to_string(s[0]) + " rows do not split into " +
                              std::to_string(graph_count) + " graphs");
  }
  const std::size_t n = s[0] / graph_count;
  return num::mean(num::reshape(embeddings, {graph_count, n, s[1]}), 1);
}

Var encode_graph(const Var& features, const MessageEdges& edges, const GnnParams& params,
                 GnnTrace* trace) {
  params.validate();
  if (edges.nodes_per_graph == 0) throw num::ContractError("encode_graph on an empty graph");
  Var h = features;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Tensor alpha;
    h = gnn_layer(h, edges, params.layers[l], l, params.negative_slope, trace ? &alpha : nullptr);
    if (trace) trace->alpha.push_back(std::move(alpha));
  }
  return readout(h, edges.graph_count);
}

}  // namespace dss::graph
