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
#include <vector>

#include "dss/graph/diffusion_graph.hpp"
#include "dss/numerics/parameters.hpp"

namespace dss::graph {

struct GnnConfig {
  std::size_t input_dim = 12;
  std::size_t hidden_dim = 64;
  std::size_t layers = 2;
  double negative_slope = 0.2;
  NeighborMode neighbor_mode = NeighborMode::kIncoming;
};

/// Weights of one attention message-passing layer.
///   h_i' = ReLU(W_self h_i + W_neigh * sum_{j in N(i)} alpha_ij h_j)
///   e_ij = LeakyReLU(a^T [W_neigh h_i || W_neigh h_j]),  alpha = softmax_j(e_ij)
struct GnnLayerParams {
  num::Var self_weight;      // [out, in]
  num::Var neighbor_weight;  // [out, in]
  num::Var attention;        // [2*out]

  std::size_t in_dim() const { return self_weight.shape()[1]; }
  std::size_t out_dim() const { return self_weight.shape()[0]; }
};

struct GnnParams {
  std::vector<GnnLayerParams> layers;
  double negative_slope = 0.2;

  static GnnParams init(const GnnConfig& config, std::mt19937_64& rng);
  /// Checks layer count and that dims chain; throws num::DimensionError.
  void validate() const;
  std::size_t output_dim() const { return layers.back().out_dim(); }
  num::ParameterSet named_parameters(const std::string& prefix = "gnn") const;
};

/// Per-layer edge-aligned attention weights recorded during a forward pass.
struct GnnTrace {
  std::vector<num::Tensor> alpha;
};

/// Edge-aligned alpha (rank 1, ordered like `edges`). Rows of nodes without
/// neighbors are simply absent, i.e. all-zero in dense form.
num::Var attention_coefficients(const GnnLayerParams& layer, const num::Var& embeddings,
                                const MessageEdges& edges, double negative_slope = 0.2);

/// Dense [n, n] view of edge-aligned alpha for the first graph replica.
num::Tensor dense_attention(const num::Tensor& alpha, const MessageEdges& edges);

/// One message-passing step. `layer_index` is only used in error messages.
num::Var gnn_layer(const num::Var& embeddings, const MessageEdges& edges,
                   const GnnLayerParams& layer, std::size_t layer_index = 0,
                   double negative_slope = 0.2, num::Tensor* alpha_out = nullptr);

/// Mean over each replica's node rows: [graphs*n, d] -> [graphs, d].
num::Var readout(const num::Var& embeddings, std::size_t graph_count);

/// L message-passing layers followed by mean readout.
num::Var encode_graph(const num::Var& features, const MessageEdges& edges,
                      const GnnParams& params, GnnTrace* trace = nullptr);

}  // namespace dss::graph
