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

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dss/train/evaluate.hpp"

namespace dss::service {

inline constexpr char kCheckpointMagic[4] = {'D', 'S', 'S', '1'};
inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No checkpoint at the given path (maps to not_trained).
class CheckpointMissing : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_validation_loss = 0.0;
  double seconds = 0.0;
  std::string dataset_fingerprint;
  std::vector<train::EpochRecord> curve;
};

struct ModelCheckpoint {
  train::Model model;
  train::Normalization normalization;
  std::vector<train::FeatureRange> feature_ranges;
  train::TrainConfig train_config;
  train::LossConfig loss_config;
  std::string data_config_json;  // generator echo of the training dataset
  TrainingMetadata metadata;

  const train::ModelConfig& model_config() const { return model.config(); }
};

ModelCheckpoint make_checkpoint(const train::TrainResult& result, const synth::Bundle& bundle,
                                const train::TrainConfig& config, const train::LossConfig& loss);

/// "DSS1", u64 LE header length, JSON header, then every tensor as f32 LE in
/// directory order.
std::string serialize_checkpoint(const ModelCheckpoint& ckpt);
ModelCheckpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Header JSON without the tensor directory (config echo and metadata).
std::string checkpoint_summary_json(const ModelCheckpoint& ckpt);

}  // namespace dss::service
