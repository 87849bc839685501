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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "dss/graph/gnn.hpp"
#include "dss/numerics/gradcheck.hpp"
#include "oracles/naive_models.hpp"

using namespace dss;
using graph::DiffusionGraph;
using graph::GraphEdge;
using graph::GraphNode;
using num::Shape;
using num::Tensor;
using num::Var;

namespace {

DiffusionGraph make_graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<GraphNode> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({i, graph::NodeKind::kUser});
  std::vector<GraphEdge> es;
  for (auto [s, d] : edges) es.push_back({s, d, graph::EdgeKind::kShare});
  return DiffusionGraph(std::move(nodes), std::move(es));
}

std::vector<std::vector<std::size_t>> neighbor_lists(const DiffusionGraph& g) {
  std::vector<std::vector<std::size_t>> out(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) out[i] = g.in_neighbors(i);
  return out;
}

oracle::NaiveGatLayer to_naive(const graph::GnnLayerParams& layer) {
  oracle::NaiveGatLayer n;
  n.self_weight = oracle::to_matrix(layer.self_weight.value().values(), layer.out_dim(), layer.in_dim());
  n.neighbor_weight =
      oracle::to_matrix(layer.neighbor_weight.value().values(), layer.out_dim(), layer.in_dim());
  n.attention = layer.attention.value().values();
  return n;
}

graph::GnnParams random_params(std::size_t in, std::size_t hidden, std::size_t layers,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  graph::GnnConfig cfg;
  cfg.input_dim = in;
  cfg.hidden_dim = hidden;
  cfg.layers = layers;
  auto p = graph::GnnParams::init(cfg, rng);
  // Larger attention vectors make the softmax non-trivial.
  for (auto& l : p.layers) l.attention.assign(Tensor::randn(l.attention.shape(), rng, 1.0));
  return p;
}

Tensor random_features(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return Tensor::randn({n, d}, rng);
}

}  // namespace

TEST(DiffusionGraph, RejectsDanglingAndDuplicateEdges) {
  EXPECT_THROW(make_graph(2, {{0, 5}}), graph::GraphError);
  EXPECT_THROW(make_graph(2, {{0, 1}, {0, 1}}), graph::GraphError);
  DiffusionGraph g = make_graph(3, {{0, 2}, {1, 2}});
  EXPECT_EQ(g.in_neighbors(2), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(g.out_neighbors(0), (std::vector<std::size_t>{2}));
  EXPECT_EQ(g.neighborhood(0, graph::NeighborMode::kSymmetric), (std::vector<std::size_t>{2}));
}

TEST(AttentionCoefficients, SingleNeighborGetsFullWeight) {
  DiffusionGraph g = make_graph(2, {{0, 1}});
  auto edges = graph::message_edges(g, graph::NeighborMode::kIncoming);
  auto p = random_params(3, 4, 1, 1);
  Var alpha = graph::attention_coefficients(p.layers[0], Var::constant(random_features(2, 3, 2)), edges);
  ASSERT_EQ(alpha.size(), 1u);
  EXPECT_DOUBLE_EQ(alpha.value()[0], 1.0);
}

TEST(AttentionCoefficients, IdenticalNeighborsSplitEvenly) {
  DiffusionGraph g = make_graph(3, {{1, 0}, {2, 0}});
  auto edges = graph::message_edges(g, graph::NeighborMode::kIncoming);
  auto p = random_params(3, 4, 1, 3);
  Tensor h = Tensor::from_rows({{0.3, -1.0, 2.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}});
  Tensor dense = graph::dense_attention(
      graph::attention_coefficients(p.layers[0], Var::constant(h), edges).value(), edges);
  EXPECT_DOUBLE_EQ(dense.at(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(dense.at(0, 2), 0.5);
}

TEST(AttentionCoefficients, StarGraphMatchesNaiveLoop) {
  // hub 0 <-> leaves 1..3
  DiffusionGraph g = make_graph(4, {{1, 0}, {2, 0}, {3, 0}, {0, 1}, {0, 2}, {0, 3}});
  auto edges = graph::message_edges(g, graph::NeighborMode::kIncoming);
  auto p = random_params(5, 6, 1, 7);
  Tensor h = random_features(4, 5, 7);
  Tensor dense = graph::dense_attention(
      graph::attention_coefficients(p.layers[0], Var::constant(h), edges).value(), edges);
  auto expected = oracle::naive_alpha(to_naive(p.layers[0]), oracle::to_matrix(h.values(), 4, 5),
                                      neighbor_lists(g), 0.2);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(dense.at(i, j), expected[i][j], 1e-6);
}

TEST(AttentionCoefficients, RowsAreDistributionsSupportedOnNeighbors) {
  std::mt19937_64 rng(21);
  std::vector<std::pair<std::size_t, std::size_t>> es;
  std::bernoulli_distribution coin(0.3);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j)
      if (i != j && coin(rng)) es.emplace_back(i, j);
  DiffusionGraph g = make_graph(12, es);
  auto edges = graph::message_edges(g, graph::NeighborMode::kIncoming);
  auto p = random_params(4, 8, 1, 22);
  Tensor dense = graph::dense_attention(
      graph::attention_coefficients(p.layers[0], Var::constant(random_features(12, 4, 23)), edges)
          .value(),
      edges);
  for (std::size_t i = 0; i < 12; ++i) {
    double total = 0.0;
    const auto& hood = g.in_neighbors(i);
    for (std::size_t j = 0; j < 12; ++j) {
      const bool neighbor = std::find(hood.begin(), hood.end(), j) != hood.end();
      if (!neighbor) EXPECT_EQ(dense.at(i, j), 0.0);
      EXPECT_GE(dense.at(i, j), 0.0);
      total += dense.at(i, j);
    }
    if (hood.empty()) {
      EXPECT_EQ(total, 0.0);
    } else {
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(GnnLayer, NoEdgesWithIdentitySelfWeightIsRelu) {
  DiffusionGraph g = make_graph(3, {});
  auto edges = graph::message_edges(g, graph::NeighborMode::kIncoming);
  auto p = random_params(4, 4, 1, 5);
  p.layers[0].self_weight.assign(Tensor::identity(4));
  Tensor h = random_features(3, 4, 6);
  Tensor out = graph::gnn_layer(Var::constant(h), edges, p.layers[0]).value();
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_EQ(out[i], std::max(0.0, h[i]));
}

TEST(GnnLayer, ZeroWeightsGiveZeroEmbeddings) {
  DiffusionGraph g = make_graph(3, {{0, 1}, {1, 2}});
  auto edges = graph::message_edges(g, graph::NeighborMode::kIncoming);
  auto p = random_params(4, 5, 1, 5);
  p.layers[0].self_weight.assign(Tensor({5, 4}));
  p.layers[0].neighbor_weight.assign(Tensor({5, 4}));
  Tensor out = graph::gnn_layer(Var::constant(random_features(3, 4, 1)), edges, p.layers[0]).value();
  EXPECT_EQ(out, Tensor::zeros({3, 5}));
}

TEST(GnnLayer, CycleMatchesNaiveLoop) {
  DiffusionGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto edges = graph::message_edges(g, graph::NeighborMode::kIncoming);
  auto p = random_params(3, 5, 1, 7);
  Tensor h = random_features(4, 3, 7);
  Tensor out = graph::gnn_layer(Var::constant(h), edges, p.layers[0]).value();
  auto expected = oracle::naive_gat_layer(to_naive(p.layers[0]), oracle::to_matrix(h.values(), 4, 3),
                                          neighbor_lists(g), 0.2);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(out.at(i, k), expected[i][k], 1e-6);
}

TEST(GnnLayer, DimensionMismatchNamesLayer) {
  DiffusionGraph g = make_graph(3, {{0, 1}});
  auto edges = graph::message_edges(g, graph::NeighborMode::kIncoming);
  auto p = random_params(4, 5, 2, 1);
  try {
    graph::gnn_layer(Var::constant(random_features(3, 3, 1)), edges, p.layers[1], 1);
    FAIL();
  } catch (const num::DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos);
  }
  p.layers[1].self_weight = Var::parameter(Tensor({5, 7}));
  p.layers[1].neighbor_weight = Var::parameter(Tensor({5, 7}));
  EXPECT_THROW(p.validate(), num::DimensionError);
}

TEST(GnnLayer, PermutationEquivariance) {
  std::mt19937_64 rng(4);
  DiffusionGraph g = make_graph(5, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 1}, {0, 3}});
  auto p = random_params(3, 4, 1, 8);
  Tensor h = random_features(5, 3, 9);
  Tensor base = graph::gnn_layer(Var::constant(h), graph::message_edges(g, graph::NeighborMode::kIncoming),
                                 p.layers[0])
                    .value();
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::size_t> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);  // new position of old node i is perm[i]
    std::vector<std::pair<std::size_t, std::size_t>> es;
    for (const auto& e : g.edges()) es.emplace_back(perm[e.src], perm[e.dst]);
    DiffusionGraph pg = make_graph(5, es);
    Tensor ph({5, 3});
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t k = 0; k < 3; ++k) ph.at(perm[i], k) = h.at(i, k);
    Tensor out = graph::gnn_layer(Var::constant(ph), graph::message_edges(pg, graph::NeighborMode::kIncoming),
                                  p.layers[0])
                     .value();
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(out.at(perm[i], k), base.at(i, k), 1e-12);
  }
}

TEST(GnnLayer, IsolatedNodeDoesNotDisturbOthers) {
  DiffusionGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 1}});
  DiffusionGraph g_plus = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 1}});
  auto p = random_params(3, 4, 2, 12);
  Tensor h = random_features(4, 3, 13);
  Tensor h_plus({5, 3});
  std::copy(h.data().begin(), h.data().end(), h_plus.data().begin());
  h_plus.at(4, 0) = 7.0;
  Var a = Var::constant(h), b = Var::constant(h_plus);
  for (std::size_t l = 0; l < 2; ++l) {
    a = graph::gnn_layer(a, graph::message_edges(g, graph::NeighborMode::kIncoming), p.layers[l], l);
    b = graph::gnn_layer(b, graph::message_edges(g_plus, graph::NeighborMode::kIncoming), p.layers[l], l);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(a.value().at(i, k), b.value().at(i, k));
  }
}

TEST(Readout, MeanOfRows) {
  Tensor same = Tensor::from_rows({{1.5, -2.0}, {1.5, -2.0}, {1.5, -2.0}});
  EXPECT_EQ(graph::readout(Var::constant(same), 1).value(), Tensor::from_rows({{1.5, -2.0}}));
  Tensor two = Tensor::from_rows({{0.0, 2.0}, {2.0, 0.0}});
  EXPECT_EQ(graph::readout(Var::constant(two), 1).value(), Tensor::from_rows({{1.0, 1.0}}));
  EXPECT_THROW(graph::readout(Var::constant(Tensor({0, 2})), 1), num::ContractError);
}

TEST(EncodeGraph, SingleLayerIsLayerPlusReadout) {
  DiffusionGraph g = make_graph(4, {{0, 1}, {2, 1}, {3, 2}});
  auto edges = graph::message_edges(g, graph::NeighborMode::kIncoming);
  auto p = random_params(3, 4, 1, 2);
  Var h = Var::constant(random_features(4, 3, 3));
  EXPECT_EQ(graph::encode_graph(h, edges, p).value(),
            graph::readout(graph::gnn_layer(h, edges, p.layers[0]), 1).value());
}

TEST(EncodeGraph, RelabeledIdsGiveIdenticalEmbedding) {
  auto p = random_params(3, 4, 2, 2);
  Tensor h = random_features(3, 3, 4);
  DiffusionGraph a = make_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  std::vector<GraphNode> nodes{{100, graph::NodeKind::kUser}, {7, graph::NodeKind::kUser},
                               {55, graph::NodeKind::kUser}};
  DiffusionGraph b(nodes, {{100, 7, graph::EdgeKind::kShare},
                           {7, 55, graph::EdgeKind::kShare},
                           {55, 100, graph::EdgeKind::kShare}});
  EXPECT_EQ(graph::encode_graph(Var::constant(h), graph::message_edges(a, graph::NeighborMode::kIncoming), p).value(),
            graph::encode_graph(Var::constant(h), graph::message_edges(b, graph::NeighborMode::kIncoming), p).value());
}

TEST(EncodeGraph, TwoLayersMatchNaiveComposition) {
  DiffusionGraph g = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 2}, {3, 1}});
  auto edges = graph::message_edges(g, graph::NeighborMode::kIncoming);
  auto p = random_params(4, 6, 2, 11);
  Tensor h = random_features(5, 4, 11);
  Tensor out = graph::encode_graph(Var::constant(h), edges, p).value();
  std::vector<oracle::NaiveGatLayer> layers{to_naive(p.layers[0]), to_naive(p.layers[1])};
  auto expected = oracle::naive_encode(layers, oracle::to_matrix(h.values(), 5, 4), neighbor_lists(g), 0.2);
  ASSERT_EQ(out.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(out[k], expected[k], 1e-6);
}

TEST(EncodeGraph, BatchedReplicasMatchIndividualGraphs) {
  DiffusionGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {1, 3}});
  auto p = random_params(3, 4, 2, 31);
  Tensor h0 = random_features(4, 3, 1), h1 = random_features(4, 3, 2);
  Tensor stacked({8, 3});
  std::copy(h0.data().begin(), h0.data().end(), stacked.data().begin());
  std::copy(h1.data().begin(), h1.data().end(), stacked.data().begin() + 12);
  Tensor batched = graph::encode_graph(Var::constant(stacked),
                                       graph::message_edges(g, graph::NeighborMode::kIncoming, 2), p)
                       .value();
  auto single = [&](const Tensor& h) {
    return graph::encode_graph(Var::constant(h), graph::message_edges(g, graph::NeighborMode::kIncoming), p).value();
  };
  Tensor e0 = single(h0), e1 = single(h1);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(batched.at(0, k), e0[k], 1e-12);
    EXPECT_NEAR(batched.at(1, k), e1[k], 1e-12);
  }
}

TEST(EncodeGraph, GradientsMatchFiniteDifferences) {
  DiffusionGraph g = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {2, 0}});
  auto edges = graph::message_edges(g, graph::NeighborMode::kSymmetric);
  auto p = random_params(3, 4, 2, 17);
  Var h = Var::parameter(random_features(5, 3, 18), "features");
  auto params = p.named_parameters().vars();
  params.push_back(h);
  std::mt19937_64 rng(19);
  Var proj = Var::constant(Tensor::randn({1, 4}, rng));
  auto report = num::finite_difference_check(
      [&] { return num::sum_all(num::mul(graph::encode_graph(h, edges, p), proj)); }, params);
  EXPECT_LT(report.max_relative_error(), 1e-4);
}
