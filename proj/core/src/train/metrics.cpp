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

#include "dss/train/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace dss::train {

RegressionMetrics regression_metrics(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("metrics: " + std::to_string(predicted.size()) + " predictions for " +
                                std::to_string(truth.size()) + " targets");
  }
  if (truth.empty()) throw std::invalid_argument("metrics need at least one target");
  const double n = static_cast<double>(truth.size());
  double sse = 0.0, sae = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predicted[i] - truth[i];
    sse += e * e;
    sae += std::abs(e);
    mean += truth[i];
  }
  mean /= n;
  double sst = 0.0;
  for (double y : truth) sst += (y - mean) * (y - mean);
  RegressionMetrics m;
  m.rmse = std::sqrt(sse / n);
  m.mae = sae / n;
  if (sst > 0.0) {
    m.r2 = 1.0 - sse / sst;
  } else {
    m.r2 = std::nan("");
    m.r2_note = "targets are constant; R^2 is undefined";
  }
  return m;
}

double Confusion::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }

double Confusion::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }

double Confusion::f1() const {
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

Confusion confusion(std::span<const double> probabilities, std::span<const double> labels, double threshold) {
  if (probabilities.size() != labels.size()) throw std::invalid_argument("confusion: misaligned predictions and labels");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = probabilities[i] >= threshold;
    const bool truth = labels[i] >= 0.5;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

}  // namespace dss::train
