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

#include "dss/temporal/window.hpp"

#include <algorithm>

namespace dss::temporal {

SequenceWindow build_window(std::span<const double> graph_embedding, const num::Tensor& ad,
                            const num::Tensor& consumer, std::size_t start) {
  if (ad.rank() != 2 || consumer.rank() != 2) {
    throw AlignmentError("build_window: ad stream " + num::shape_string(ad.shape()) +
                         " and consumer stream " + num::shape_string(consumer.shape()) +
                         " must both be [steps, features]");
  }
  if (ad.dim(0) != consumer.dim(0)) {
    throw AlignmentError("build_window: ad stream has " + std::to_string(ad.dim(0)) +
                         " steps but consumer stream has " + std::to_string(consumer.dim(0)));
  }
  const std::size_t steps = ad.dim(0);
  const std::size_t g = graph_embedding.size(), da = ad.dim(1), dc = consumer.dim(1);
  SequenceWindow w;
  w.start = start;
  w.fused = num::Tensor({steps, g + da + dc});
  for (std::size_t t = 0; t < steps; ++t) {
    double* row = w.fused.data().data() + t * (g + da + dc);
    std::copy(graph_embedding.begin(), graph_embedding.end(), row);
    std::copy_n(ad.data().data() + t * da, da, row + g);
    std::copy_n(consumer.data().data() + t * dc, dc, row + g + da);
  }
  return w;
}

std::vector<std::size_t> window_starts(std::size_t length, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0) throw num::ContractError("window and stride must be positive");
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window <= length; s += stride) starts.push_back(s);
  return starts;
}

num::Var fuse_sequence(const num::Var& graph_embedding, const num::Var& exogenous) {
  const auto& gs = graph_embedding.shape();
  const auto& xs = exogenous.shape();
  if (gs.size() != 2 || xs.size() != 3 || gs[0] != xs[0]) {
    throw AlignmentError("fuse_sequence: graph embedding " + num::shape_string(gs) +
                         " does not align with exogenous stream " + num::shape_string(xs));
  }
  num::Var repeated =
      num::broadcast_to(num::reshape(graph_embedding, {gs[0], 1, gs[1]}), {gs[0], xs[1], gs[1]});
  const num::Var parts[] = {repeated, exogenous};
  return num::concat(parts, 2);
}

}  // namespace dss::temporal
