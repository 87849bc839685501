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
#include <span>
#include <string>
#include <vector>

#include "dss/numerics/autograd.hpp"

namespace dss::num {

struct GradCheckEntry {
  std::string name;
  std::size_t elements = 0;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
};

struct GradCheckReport {
  double tolerance = 0.0;
  std::vector<GradCheckEntry> entries;  // one per checked parameter

  double max_relative_error() const;
  bool passed() const { return max_relative_error() < tolerance; }
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-5;
  /// Below this magnitude both derivatives count as zero and the absolute
  /// difference is reported instead of a ratio.
  double zero_threshold = 1e-6;
};

/// Compares reverse-mode gradients of `loss_fn` against central differences
/// for every parameter that requires gradients. Frozen parameters are skipped.
/// `loss_fn` must rebuild its graph from the current parameter values.
GradCheckReport finite_difference_check(const std::function<Var()>& loss_fn,
                                        std::span<Var> params,
                                        const GradCheckOptions& options = {});

/// Relative error between an analytic and a numeric derivative.
double relative_error(double analytic, double numeric, double zero_threshold = 1e-6);

}  // namespace dss::num
