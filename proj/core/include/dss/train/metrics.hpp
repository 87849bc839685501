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

#include <cstddef>
#include <span>
#include <string>

namespace dss::train {

struct RegressionMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;      // NaN when the targets are constant
  std::string r2_note;  // set when r2 is NaN
};

RegressionMetrics regression_metrics(std::span<const double> predicted, std::span<const double> truth);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  double precision() const;
  double recall() const;
  /// 2TP / (2TP + FP + FN); 1 when there is nothing to detect and nothing was flagged.
  double f1() const;
};

/// Predicted positive iff probability >= threshold.
Confusion confusion(std::span<const double> probabilities, std::span<const double> labels, double threshold = 0.5);

}  // namespace dss::train
