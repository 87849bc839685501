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

#include "dss/graph/diffusion_graph.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace dss::graph {

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kUser: return "user";
    case NodeKind::kBrand: return "brand";
    case NodeKind::kContent: return "content";
  }
  return "user";
}

std::string to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kFollow: return "follow";
    case EdgeKind::kShare: return "share";
    case EdgeKind::kMention: return "mention";
  }
  return "follow";
}

NodeKind parse_node_kind(const std::string& s) {
  if (s == "user") return NodeKind::kUser;
  if (s == "brand") return NodeKind::kBrand;
  if (s == "content") return NodeKind::kContent;
  throw GraphError("unknown node kind '" + s + "'");
}

EdgeKind parse_edge_kind(const std::string& s) {
  if (s == "follow") return EdgeKind::kFollow;
  if (s == "share") return EdgeKind::kShare;
  if (s == "mention") return EdgeKind::kMention;
  throw GraphError("unknown edge kind '" + s + "'");
}

DiffusionGraph::DiffusionGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      throw GraphError("duplicate node id " + std::to_string(nodes_[i].id));
    }
  }
  in_.assign(nodes_.size(), {});
  out_.assign(nodes_.size(), {});
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (const auto& e : edges_) {
    auto s = index_.find(e.src);
    auto d = index_.find(e.dst);
    if (s == index_.end() || d == index_.end()) {
      throw GraphError("edge " + std::to_string(e.src) + " -> " + std::to_string(e.dst) +
                       " references a missing node");
    }
    if (!seen.emplace(e.src, e.dst).second) {
      throw GraphError("duplicate edge " + std::to_string(e.src) + " -> " +
                       std::to_string(e.dst));
    }
    in_[d->second].push_back(s->second);
    out_[s->second].push_back(d->second);
  }
  for (auto& v : in_) std::sort(v.begin(), v.end());
  for (auto& v : out_) std::sort(v.begin(), v.end());
}

std::size_t DiffusionGraph::index_of(std::uint64_t id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw GraphError("unknown node id " + std::to_string(id));
  return it->second;
}

std::vector<std::size_t> DiffusionGraph::neighborhood(std::size_t index, NeighborMode mode) const {
  if (mode == NeighborMode::kIncoming) return in_[index];
  std::vector<std::size_t> merged;
  std::set_union(in_[index].begin(), in_[index].end(), out_[index].begin(), out_[index].end(),
                 std::back_inserter(merged));
  merged.erase(std::remove(merged.begin(), merged.end(), index), merged.end());
  return merged;
}

MessageEdges message_edges(const DiffusionGraph& graph, NeighborMode mode, std::size_t copies) {
  const std::size_t n = graph.node_count();
  std::vector<std::size_t> recv, send;
  std::vector<std::vector<std::size_t>> hoods(n);
  std::size_t per_copy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    hoods[i] = graph.neighborhood(i, mode);
    per_copy += hoods[i].size();
  }
  recv.reserve(per_copy * copies);
  send.reserve(per_copy * copies);
  for (std::size_t b = 0; b < copies; ++b) {
    const std::size_t offset = b * n;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j : hoods[i]) {
        recv.push_back(offset + i);
        send.push_back(offset + j);
      }
    }
  }
  MessageEdges out;
  out.receiver = num::make_index(std::move(recv));
  out.sender = num::make_index(std::move(send));
  out.nodes_per_graph = n;
  out.graph_count = copies;
  return out;
}

}  // namespace dss::graph
