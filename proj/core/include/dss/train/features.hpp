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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dss/graph/diffusion_graph.hpp"
#include "dss/numerics/tensor.hpp"
#include "dss/synth/dataset.hpp"

namespace dss::train {

inline constexpr std::size_t kActivityLags = 8;
/// Per node: activity at t..t-7, window sentiment + node bias, kind one-hot.
inline constexpr std::size_t kNodeFeatureDim = kActivityLags + 1 + 3;

/// Ad then consumer columns, in schema order; the temporal model's X^(a) || X^(c).
std::vector<std::size_t> exogenous_columns();

struct Normalization {
  std::vector<std::size_t> columns;  // schema indices, aligned with mean/scale
  std::vector<double> mean, scale;
  double target_mean = 0.0;
  double target_scale = 1.0;

  double normalize(std::size_t slot, double raw) const { return (raw - mean[slot]) / scale[slot]; }
  double target_to_raw(double z) const { return z * target_scale + target_mean; }
  std::string to_json() const;
  static Normalization from_json(const std::string& text);
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

/// Statistics over steps [0, train_end) of every series.
Normalization fit_normalization(const synth::TimeSeriesDataset& data, std::size_t train_end);

struct FeatureRange {
  std::string column;
  double min = 0.0;
  double max = 0.0;
};
std::vector<FeatureRange> feature_ranges(const synth::TimeSeriesDataset& data);

/// A window covers steps [start, start + window); targets are the next `horizon` steps.
struct WindowRef {
  std::size_t series = 0;
  std::size_t start = 0;
  friend bool operator==(const WindowRef&, const WindowRef&) = default;
};

struct SplitPlan {
  std::size_t train_end = 0;       // first step whose target belongs to validation
  std::size_t validation_end = 0;  // first step whose target belongs to test
  std::vector<WindowRef> train, validation, test;
};

/// Time-ordered split by target step: a window joins the split holding all of
/// its targets; windows straddling a boundary are dropped.
SplitPlan plan_splits(std::size_t series, std::size_t steps, std::size_t window, std::size_t horizon,
                      double validation_fraction, double test_fraction, std::size_t train_stride = 1,
                      std::size_t eval_stride = 1);

/// Forces a raw column value at every step of the window (what-if rollouts).
struct ColumnOverride {
  std::size_t column = 0;
  double value = 0.0;
};

struct Batch {
  std::size_t size = 0;
  std::size_t window = 0;
  std::size_t horizon = 0;
  num::Tensor exogenous;      // [B, T, x] normalized
  num::Tensor node_features;  // [B * n, kNodeFeatureDim]
  num::Tensor targets;        // [B, k] normalized; zero where unavailable
  num::Tensor labels;         // [B, T] anomaly labels of the window steps
  num::Tensor last_target;    // [B] normalized y at the window end
  std::vector<std::size_t> starts;
  std::vector<WindowRef> refs;
  std::optional<graph::MessageEdges> edges;
};

struct BatchSource {
  const graph::DiffusionGraph* graph = nullptr;
  const synth::NodeAttributes* nodes = nullptr;
  const synth::TimeSeriesDataset* data = nullptr;
};

BatchSource source_of(const synth::Bundle& bundle);

/// Assembles B windows. Targets past the series end are left zero, so a
/// window ending on the last step can still be forecast.
Batch make_batch(const BatchSource& source, const Normalization& norm, std::span<const WindowRef> refs,
                 std::size_t window, std::size_t horizon, bool with_graph,
                 graph::NeighborMode mode = graph::NeighborMode::kIncoming,
                 std::span<const ColumnOverride> overrides = {});

/// Node feature block for one window end (rows = graph nodes).
num::Tensor node_features(const BatchSource& source, std::size_t series, std::size_t end,
                          std::size_t window);

}  // namespace dss::train
