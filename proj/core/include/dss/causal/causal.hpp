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

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dss/synth/dataset.hpp"

namespace dss::causal {

/// Bad intervention spec or unknown column (maps to the service's schema_error).
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateArmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedDatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InterventionSpec {
  std::string treatment = "spend";
  double a0 = 0.0;
  double a1 = 1.0;
  std::vector<std::string> covariates{"sentiment"};

  /// a0 != a1, treatment is an ad-domain column, covariates exist.
  void validate() const;
  std::string to_json() const;
  static InterventionSpec from_json(const std::string& text);
};

struct Sample {
  double level = 0.0;  // continuous treatment level, kept for diagnostics
  bool treated = false;
  double outcome = 0.0;
  std::vector<double> covariates;
};

struct LabeledSamples {
  std::vector<Sample> samples;
  std::size_t treated_count = 0;
  std::size_t control_count = 0;
};

/// Nearest-level rule: treated iff |A - a1| < |A - a0|; ties go to control.
bool nearest_level_treated(double level, double a0, double a1);

LabeledSamples label_samples(std::span<const double> levels, std::span<const double> outcomes,
                             const std::vector<std::vector<double>>& covariates,
                             const InterventionSpec& spec);

/// One unit per series: A and X are series means of their columns, Y the mean target.
LabeledSamples binarize_treatment(const synth::TimeSeriesDataset& data, const InterventionSpec& spec);

struct PropensityOptions {
  std::size_t iterations = 3000;
  double learning_rate = 0.05;
  double clip = 0.05;
};

struct PropensityModel {
  std::vector<double> coefficients;  // intercept first, then one per covariate (standardized)
  std::vector<double> center, scale;
  double clip_low = 0.05;
  double clip_high = 0.95;
  std::vector<std::string> warnings;

  double raw(std::span<const double> x) const;
  double predict(std::span<const double> x) const;  // clipped
};

/// Logistic regression fit with Adam on the autodiff tape.
PropensityModel fit_propensity(const LabeledSamples& samples, const PropensityOptions& options = {});

struct CausalEstimate {
  double ace = 0.0;
  double treated_mean = 0.0;
  double control_mean = 0.0;
  std::size_t treated_count = 0;
  std::size_t control_count = 0;
  double propensity_min = 0.0;
  double propensity_max = 0.0;
  double propensity_mean = 0.0;
};

/// Self-normalized IPW from explicit arms, outcomes, and propensities.
CausalEstimate hajek_estimate(std::span<const std::uint8_t> treated, std::span<const double> outcomes,
                              std::span<const double> propensities);
CausalEstimate estimate_ace(const LabeledSamples& samples, const PropensityModel& model);
double naive_difference(const LabeledSamples& samples);

/// Mean over units of max(0, 1 - |pred - truth| / max(|truth|, 0.1)).
double ccs_score(std::span<const double> predicted, std::span<const double> truth);

}  // namespace dss::causal
