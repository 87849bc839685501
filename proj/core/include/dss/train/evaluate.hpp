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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dss/causal/causal.hpp"
#include "dss/temporal/window.hpp"
#include "dss/train/metrics.hpp"
#include "dss/train/trainer.hpp"

namespace dss::train {

struct EvalReport {
  std::string model;
  std::string dataset_fingerprint;
  std::size_t windows = 0;
  std::size_t forecast_points = 0;
  double rmse = 0.0;  // normalized target units
  double mae = 0.0;
  double r2 = 0.0;
  double f1 = 0.0;
  Confusion anomaly;
  std::optional<double> ate_error;  // raw target units; needs ground truth
  std::optional<double> ccs;
  std::optional<double> ace_rollout;
  std::vector<std::string> notes;
  std::vector<EpochRecord> curve;
  double seconds = 0.0;

  /// RMSE >= MAE >= 0, R^2 <= 1 (or NaN), F1 and CCS in [0, 1].
  bool invariants_hold() const;
  std::string to_json() const;
  static EvalReport from_json(const std::string& text);
};

struct Prediction {
  num::Tensor forecast;      // [B, k] normalized
  num::Tensor anomaly_prob;  // [B, T]
};
using Predictor = std::function<Prediction(const Batch&)>;

Predictor model_predictor(const Model& model);
/// y_hat_{t+h} = y_t for every h; never flags anomalies.
Predictor persistence_predictor();

struct EvalOptions {
  std::size_t batch_size = 256;
  double threshold = 0.5;
  /// Score what-if rollouts against planted counterfactuals when available.
  bool counterfactuals = true;
  causal::InterventionSpec intervention;
};

struct EvalTarget {
  const synth::Bundle* bundle = nullptr;
  const Normalization* normalization = nullptr;
  std::vector<WindowRef> windows;
  std::size_t window = 16;
  std::size_t horizon = 4;
  bool uses_graph = true;
  graph::NeighborMode mode = graph::NeighborMode::kIncoming;
};

EvalReport evaluate(const std::string& name, const Predictor& predictor, const EvalTarget& target,
                    const EvalOptions& options = {});

/// Test split of a dataset for a model trained with `config`.
EvalTarget test_target(const synth::Bundle& bundle, const Normalization& norm, const ModelConfig& model,
                       const TrainConfig& config);

enum class BaselineKind { kPersistence, kGru };
BaselineKind parse_baseline_kind(const std::string& s);  // throws synth::ConfigError

struct BaselineConfig {
  TrainConfig train;
  LossConfig loss;
  ModelConfig gru;  // family forced to gru
  EvalOptions eval;
};
EvalReport run_baseline(BaselineKind kind, const synth::Bundle& bundle, const BaselineConfig& config);

class ComparabilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sorted by RMSE, ties by MAE, stable otherwise.
std::vector<EvalReport> compare(std::vector<EvalReport> reports);
std::string comparison_table(const std::vector<EvalReport>& ranked);

struct Counterfactual {
  std::vector<double> trajectory_a0;  // raw target units, t+1..t+k
  std::vector<double> trajectory_a1;
  std::vector<double> per_step_delta;
  double ace_rollout = 0.0;
};

/// Forecasts the window twice with the treatment column forced to a0 and a1.
Counterfactual counterfactual_predict(const Predictor& predictor, const EvalTarget& target, const WindowRef& ref,
                                      const causal::InterventionSpec& spec);

/// Forecast for one window in raw target units, with last-layer attention.
temporal::ForecastResult forecast_window(const Model& model, const EvalTarget& target, const WindowRef& ref);

struct Influencer {
  std::uint64_t node_id = 0;
  double score = 0.0;
};

struct Explanation {
  std::vector<num::Tensor> temporal_attention;  // last layer, per head [T, T]
  std::vector<double> attention_row_sums;       // head-major, T per head
  std::vector<Influencer> top_influencers;
};

/// Influence of node j = sum over layers and receivers i of alpha_ij.
Explanation explain_window(const Model& model, const EvalTarget& target, const WindowRef& ref,
                           std::size_t top = 10);

}  // namespace dss::train
