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
#include <map>
#include <string>

#include "dss/synth/generator.hpp"
#include "dss/train/trainer.hpp"

namespace dss::service {

/// Parses `key = value` lines. '#' starts a comment; blank lines are skipped;
/// whitespace around keys and values is trimmed. Duplicate keys are errors.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Every tunable of a generate/train run. Keys are section-prefixed:
/// data.*, model.*, train.*, loss.*.
struct RunConfig {
  synth::GeneratorConfig data;
  train::ModelConfig model;
  train::TrainConfig train;
  train::LossConfig loss;
};

/// Applies recognised keys over `base`; unknown keys raise synth::ConfigError.
RunConfig apply_key_values(const std::map<std::string, std::string>& kv, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});
std::string to_key_values(const RunConfig& config);

/// Settings used for the bundled desk-scale runs (smaller widths, strided windows, lr 1e-3).
RunConfig desk_scale_config();

}  // namespace dss::service
