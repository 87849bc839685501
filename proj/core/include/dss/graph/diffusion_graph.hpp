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
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dss/numerics/ops.hpp"

namespace dss::graph {

enum class NodeKind { kUser, kBrand, kContent };
enum class EdgeKind { kFollow, kShare, kMention };

std::string to_string(NodeKind kind);
std::string to_string(EdgeKind kind);
NodeKind parse_node_kind(const std::string& s);
EdgeKind parse_edge_kind(const std::string& s);

struct GraphNode {
  std::uint64_t id = 0;
  NodeKind kind = NodeKind::kUser;
  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

/// Directed influence edge: `src` influences `dst`.
struct GraphEdge {
  std::uint64_t src = 0;
  std::uint64_t dst = 0;
  EdgeKind kind = EdgeKind::kFollow;
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Which nodes a node aggregates from.
enum class NeighborMode {
  kIncoming,   // N(i) = { j : j -> i }
  kSymmetric,  // N(i) = { j : j -> i or i -> j }
};

/// Content-diffusion network with validated, id-addressed nodes. Adjacency is
/// exposed by node position (0..node_count-1).
class DiffusionGraph {
 public:
  DiffusionGraph() = default;
  DiffusionGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  std::size_t index_of(std::uint64_t id) const;
  const std::vector<std::size_t>& in_neighbors(std::size_t index) const { return in_[index]; }
  const std::vector<std::size_t>& out_neighbors(std::size_t index) const { return out_[index]; }
  /// Sorted neighbor positions of `index` under `mode`.
  std::vector<std::size_t> neighborhood(std::size_t index, NeighborMode mode) const;

  friend bool operator==(const DiffusionGraph& a, const DiffusionGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<std::vector<std::size_t>> in_, out_;
};

/// Edge arrays for message passing over `copies` stacked replicas of a graph.
/// Replica b occupies node rows [b*n, (b+1)*n). Edges are ordered by receiver.
struct MessageEdges {
  num::IndexList receiver;
  num::IndexList sender;
  std::size_t nodes_per_graph = 0;
  std::size_t graph_count = 0;

  std::size_t node_count() const { return nodes_per_graph * graph_count; }
  std::size_t edge_count() const { return receiver->size(); }
};

MessageEdges message_edges(const DiffusionGraph& graph, NeighborMode mode,
                           std::size_t copies = 1);

}  // namespace dss::graph
