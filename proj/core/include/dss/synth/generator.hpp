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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dss/synth/dataset.hpp"

namespace dss::synth {

enum class Topology { kErdosRenyi, kPreferentialAttachment };

struct GeneratorConfig {
  std::uint64_t seed = 42;
  std::size_t nodes = 200;
  Topology topology = Topology::kErdosRenyi;
  double edge_probability = 0.02;
  std::size_t attachment_edges = 2;  // preferential attachment only
  std::size_t series = 500;
  std::size_t steps = 200;
  std::size_t window = 16;
  std::size_t horizon = 4;
  double anomaly_rate = 0.05;
  double treatment_effect = 1.5;  // beta_A
  double confounding = 1.0;       // gamma
  double noise_scale = 0.1;       // sigma_u

  // cascade process
  double virality_min = 0.05;
  double virality_max = 0.25;
  double wave_rate_min = 0.1;
  double wave_rate_max = 0.4;
  std::size_t max_wave_seeds = 3;
  double engagement_weight = 20.0;
  double anomaly_spike = 0.5;
  std::size_t burn_in = 8;

  void validate() const;
  std::string to_json() const;
  static GeneratorConfig from_json(const std::string& text);
};

/// splitmix64 finalizer over (seed, stream). The graph draws from stream 0;
/// series s draws its cascades from stream 2s+1 and its outcomes from 2s+2,
/// so series can be generated in any order with the same result.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

struct GraphSample {
  graph::DiffusionGraph graph;
  NodeAttributes nodes;
};

GraphSample generate_graph(const GeneratorConfig& config);

/// Activation step of every node (-1 if never reached). Seeds activate at
/// step 0; each newly active node gets one chance per out-edge.
std::vector<int> run_independent_cascade(const graph::DiffusionGraph& graph,
                                         std::span<const std::size_t> seeds, double probability,
                                         std::mt19937_64& rng);

struct CascadeStream {
  double virality = 0.0;
  std::vector<std::vector<std::uint32_t>> active;  // [burn_in + steps][nodes activated]
  std::vector<double> shares;                      // transmissions per step
};

std::vector<CascadeStream> simulate_cascades(const graph::DiffusionGraph& graph,
                                             const GeneratorConfig& config);

struct Outcomes {
  TimeSeriesDataset data;
  GroundTruth truth;
};

Outcomes generate_outcomes(const std::vector<CascadeStream>& streams, const GraphSample& graph,
                           const GeneratorConfig& config);

/// generate_graph + simulate_cascades + generate_outcomes.
Bundle generate(const GeneratorConfig& config);

}  // namespace dss::synth
