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
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dss/graph/diffusion_graph.hpp"

namespace dss::synth {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Domain { kSocial, kAd, kConsumer };

struct FeatureColumn {
  std::string name;
  Domain domain;
};

/// Fixed column order used in memory and in series.csv.
const std::vector<FeatureColumn>& feature_schema();
std::size_t feature_index(const std::string& name);  // throws SchemaError
std::vector<std::size_t> domain_columns(Domain domain);

struct SeriesData {
  std::vector<std::vector<double>> features;  // [column][step]
  std::vector<double> target;                 // y_t, market growth / ROI
  std::vector<double> volatility;             // rolling std of past y
  std::vector<std::uint8_t> anomaly;          // 0 / 1
  std::vector<std::vector<std::uint32_t>> active;  // [step] node positions activated at step

  friend bool operator==(const SeriesData&, const SeriesData&) = default;
};

struct TimeSeriesDataset {
  std::size_t steps = 0;
  std::vector<SeriesData> series;

  std::size_t series_count() const { return series.size(); }
  void validate() const;
  friend bool operator==(const TimeSeriesDataset&, const TimeSeriesDataset&) = default;
};

struct NodeAttributes {
  std::vector<double> sentiment_bias;  // per node position
  friend bool operator==(const NodeAttributes&, const NodeAttributes&) = default;
};

struct GroundTruth {
  double ate = 0.0;
  std::string treatment = "spend";
  double a0 = 0.0;
  double a1 = 1.0;
  std::vector<std::uint8_t> treated;              // per series
  std::vector<std::vector<double>> outcome_a0;    // [series][step]
  std::vector<std::vector<double>> outcome_a1;
  std::vector<std::vector<std::size_t>> anomaly_steps;

  bool has_counterfactuals() const { return !outcome_a0.empty(); }
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Bundle {
  graph::DiffusionGraph graph;
  NodeAttributes nodes;
  TimeSeriesDataset data;
  GroundTruth truth;
  std::string config_json;  // generator config echo
  std::uint64_t seed = 0;

  friend bool operator==(const Bundle&, const Bundle&) = default;
};

inline constexpr int kSchemaVersion = 1;

/// Writes graph.json, series.csv, cascades.csv, ground_truth.json, manifest.json.
void export_dataset(const Bundle& bundle, const std::filesystem::path& directory);
Bundle import_dataset(const std::filesystem::path& directory);

std::string series_csv(const TimeSeriesDataset& data);
/// FNV-1a over the canonical series.csv text; identifies a dataset in reports.
std::string dataset_fingerprint(const TimeSeriesDataset& data);

}  // namespace dss::synth
