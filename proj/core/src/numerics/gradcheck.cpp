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

#include "dss/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace dss::num {

double GradCheckReport::max_relative_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_relative_error);
  return m;
}

double relative_error(double analytic, double numeric, double zero_threshold) {
  const double diff = std::abs(analytic - numeric);
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < zero_threshold) return diff;
  return diff / scale;
}

GradCheckReport finite_difference_check(const std::function<Var()>& loss_fn,
                                        std::span<Var> params,
                                        const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;

  const Gradients grads = backward(loss_fn());
  for (std::size_t p = 0; p < params.size(); ++p) {
    Var& param = params[p];
    if (!param.requires_grad()) continue;
    GradCheckEntry entry;
    entry.name = param.name().empty() ? "param" + std::to_string(p) : param.name();
    entry.elements = param.size();
    const Tensor analytic = grads.of(param);
    const Tensor original = param.value();
    for (std::size_t k = 0; k < original.size(); ++k) {
      Tensor probe = original;
      probe[k] = original[k] + options.step;
      param.assign(probe);
      const double up = loss_fn().value().item();
      probe[k] = original[k] - options.step;
      param.assign(probe);
      const double down = loss_fn().value().item();
      const double numeric = (up - down) / (2.0 * options.step);
      entry.max_absolute_error =
          std::max(entry.max_absolute_error, std::abs(analytic[k] - numeric));
      entry.max_relative_error =
          std::max(entry.max_relative_error,
                   relative_error(analytic[k], numeric, options.zero_threshold));
    }
    param.assign(original);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace dss::num
