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
#include <stdexcept>
#include <string>
#include <vector>

#include "dss/numerics/optim.hpp"
#include "dss/synth/dataset.hpp"
#include "dss/train/model.hpp"

namespace dss::train {

struct LossConfig {
  double forecast_weight = 1.0;  // lambda_1
  double anomaly_weight = 0.5;   // lambda_2
  double positive_class_weight = 1.0;

  void validate() const;
};

/// lambda_1 * MSE(forecast, targets) + lambda_2 * BCE(probs, labels), with
/// probabilities clamped to [1e-12, 1 - 1e-12] before the log.
num::Var composite_loss(const num::Var& forecast, const num::Tensor& targets, const num::Var& anomaly_prob,
                        const num::Tensor& labels, const LossConfig& config);

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double learning_rate = 1e-4;
  num::OptimizerKind optimizer = num::OptimizerKind::kAdamW;
  double weight_decay = 0.01;
  std::size_t patience = 10;
  double validation_fraction = 0.15;
  double test_fraction = 0.15;
  std::uint64_t seed = 42;
  /// Spacing between consecutive training / evaluation window starts.
  std::size_t train_stride = 1;
  std::size_t eval_stride = 1;
  /// Re-draws a random per-series phase for the strided training starts every
  /// epoch, so all start offsets are visited over the run.
  bool jitter_train_windows = true;
  /// Caps the batches per epoch (0 = all); mostly for tests.
  std::size_t max_batches_per_epoch = 0;

  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainResult {
  Model model;  // restored to the best validation epoch, float-exact
  Normalization normalization;
  SplitPlan splits;
  std::vector<EpochRecord> curve;
  std::size_t best_epoch = 0;
  double best_validation_loss = 0.0;
  std::size_t epochs_run = 0;
  long optimizer_steps = 0;
  bool stopped_early = false;
  double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training with early stopping on validation loss.
TrainResult train(const ModelConfig& model_config, const synth::Bundle& bundle, const TrainConfig& config,
                  const LossConfig& loss = {}, const EpochCallback& on_epoch = {});

/// Mean composite loss over `refs`, batched.
double dataset_loss(const Model& model, const BatchSource& source, const Normalization& norm,
                    std::span<const WindowRef> refs, const LossConfig& loss, std::size_t batch_size);

/// Curve as CSV: epoch,train_loss,val_loss.
std::string curve_csv(const std::vector<EpochRecord>& curve);

}  // namespace dss::train
