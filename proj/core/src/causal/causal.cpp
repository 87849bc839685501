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

#include "dss/causal/causal.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "dss/numerics/ops.hpp"
#include "dss/numerics/optim.hpp"

namespace dss::causal {

namespace {

using json = nlohmann::json;

double column_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

void InterventionSpec::validate() const {
  if (a0 == a1) throw SpecError("intervention levels a0 and a1 must differ");
  if (!std::isfinite(a0) || !std::isfinite(a1)) throw SpecError("intervention levels must be finite");
  std::size_t col = 0;
  try {
    col = synth::feature_index(treatment);
  } catch (const synth::SchemaError&) {
    throw SpecError("unknown treatment column '" + treatment + "'");
  }
  if (synth::feature_schema()[col].domain != synth::Domain::kAd) {
    throw SpecError("treatment column '" + treatment + "' is not an ad feature");
  }
  for (const auto& c : covariates) {
    try {
      if (synth::feature_index(c) == col) throw SpecError("covariate '" + c + "' is the treatment itself");
    } catch (const synth::SchemaError&) {
      throw SpecError("unknown covariate column '" + c + "'");
    }
  }
}

std::string InterventionSpec::to_json() const {
  return json{{"treatment", treatment}, {"a0", a0}, {"a1", a1}, {"covariates", covariates}}.dump();
}

InterventionSpec InterventionSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(std::string("intervention spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SpecError("intervention spec must be a JSON object");
  InterventionSpec s;
  try {
    s.treatment = j.at("treatment").get<std::string>();
    s.a0 = j.at("a0").get<double>();
    s.a1 = j.at("a1").get<double>();
    s.covariates = j.value("covariates", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw SpecError(std::string("intervention spec needs treatment, a0, a1: ") + e.what());
  }
  s.validate();
  return s;
}

bool nearest_level_treated(double level, double a0, double a1) {
  return std::abs(level - a1) < std::abs(level - a0);
}

LabeledSamples label_samples(std::span<const double> levels, std::span<const double> outcomes,
                             const std::vector<std::vector<double>>& covariates,
                             const InterventionSpec& spec) {
  if (spec.a0 == spec.a1) throw SpecError("intervention levels a0 and a1 must differ");
  if (levels.size() != outcomes.size() || (!covariates.empty() && covariates.size() != levels.size())) {
    throw std::invalid_argument("treatment, outcome, and covariate rows are misaligned");
  }
  LabeledSamples out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    Sample s;
    s.level = levels[i];
    s.treated = nearest_level_treated(levels[i], spec.a0, spec.a1);
    s.outcome = outcomes[i];
    if (!covariates.empty()) s.covariates = covariates[i];
    (s.treated ? out.treated_count : out.control_count)++;
    out.samples.push_back(std::move(s));
  }
  if (out.treated_count == 0 || out.control_count == 0) {
    throw DegenerateArmError("all " + std::to_string(levels.size()) + " samples fell into the " +
                             (out.treated_count == 0 ? "control" : "treated") + " arm");
  }
  return out;
}

LabeledSamples binarize_treatment(const synth::TimeSeriesDataset& data, const InterventionSpec& spec) {
  spec.validate();
  const std::size_t a = synth::feature_index(spec.treatment);
  std::vector<std::size_t> cov;
  for (const auto& c : spec.covariates) cov.push_back(synth::feature_index(c));
  std::vector<double> levels, outcomes;
  std::vector<std::vector<double>> covariates;
  for (const auto& sd : data.series) {
    levels.push_back(column_mean(sd.features[a]));
    outcomes.push_back(column_mean(sd.target));
    std::vector<double> x;
    for (std::size_t c : cov) x.push_back(column_mean(sd.features[c]));
    covariates.push_back(std::move(x));
  }
  return label_samples(levels, outcomes, covariates, spec);
}

double PropensityModel::raw(std::span<const double> x) const {
  if (x.size() + 1 != coefficients.size()) {
    throw std::invalid_argument("propensity model expects " + std::to_string(coefficients.size() - 1) +
                                " covariates, got " + std::to_string(x.size()));
  }
  double z = coefficients[0];
  for (std::size_t j = 0; j < x.size(); ++j) z += coefficients[j + 1] * (x[j] - center[j]) / scale[j];
  return 1.0 / (1.0 + std::exp(-z));
}

double PropensityModel::predict(std::span<const double> x) const {
  return std::clamp(raw(x), clip_low, clip_high);
}

PropensityModel fit_propensity(const LabeledSamples& samples, const PropensityOptions& options) {
  if (samples.treated_count == 0 || samples.control_count == 0) {
    throw DegenerateArmError("propensity fit needs both arms non-empty");
  }
  if (!(options.clip > 0.0 && options.clip < 0.5)) throw std::invalid_argument("clip must be in (0, 0.5)");
  const std::size_t n = samples.samples.size();
  const std::size_t k = samples.samples.front().covariates.size();
  PropensityModel model;
  model.clip_low = options.clip;
  model.clip_high = 1.0 - options.clip;
  model.center.assign(k, 0.0);
  model.scale.assign(k, 1.0);
  for (std::size_t j = 0; j < k; ++j) {
    double m = 0.0, v = 0.0;
    for (const auto& s : samples.samples) m += s.covariates.at(j);
    m /= static_cast<double>(n);
    for (const auto& s : samples.samples) v += (s.covariates[j] - m) * (s.covariates[j] - m);
    v /= static_cast<double>(n);
    model.center[j] = m;
    model.scale[j] = v > 1e-24 ? std::sqrt(v) : 1.0;
  }

  // Design matrix with a leading column of ones.
  num::Tensor design({n, k + 1});
  num::Tensor labels({n, 1}), complement({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = samples.samples[i];
    design.at(i, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) design.at(i, j + 1) = (s.covariates[j] - model.center[j]) / model.scale[j];
    labels.at(i, 0) = s.treated ? 1.0 : 0.0;
    complement.at(i, 0) = 1.0 - labels.at(i, 0);
  }
  num::Tensor init({k + 1, 1});
  const double frac = static_cast<double>(samples.treated_count) / static_cast<double>(n);
  init[0] = std::log(frac / (1.0 - frac));
  num::Var beta = num::Var::parameter(init, "propensity.beta");
  num::Var x = num::Var::constant(design), y = num::Var::constant(labels);
  num::Var one_minus_y = num::Var::constant(complement);

  num::OptimizerConfig cfg;
  cfg.kind = num::OptimizerKind::kAdam;
  cfg.learning_rate = options.learning_rate;
  cfg.weight_decay = 0.0;
  num::Optimizer opt(cfg, {beta});
  for (std::size_t it = 0; it < options.iterations; ++it) {
    // Halve the step every eighth of the run so Adam settles onto the optimum.
    const std::size_t stage = std::max<std::size_t>(1, options.iterations / 8);
    opt.set_learning_rate(options.learning_rate * std::pow(0.5, static_cast<double>(it / stage)));
    num::Var p = num::clamp(num::sigmoid(num::matmul(x, beta)), 1e-12, 1.0 - 1e-12);
    num::Var ll = num::add(num::mul(y, num::log(p)),
                           num::mul(one_minus_y, num::log(num::add_scalar(num::scale(p, -1.0), 1.0))));
    num::Var loss = num::scale(num::mean_all(ll), -1.0);
    opt.step(num::backward(loss));
  }
  model.coefficients = beta.value().values();

  bool separated = true;
  for (const auto& s : samples.samples) {
    const double p = model.raw(s.covariates);
    if (s.treated ? p <= model.clip_high : p >= model.clip_low) {
      separated = false;
      break;
    }
  }
  if (separated) {
    model.warnings.push_back("covariates perfectly separate the arms; propensities sit at the clipping bounds");
  }
  return model;
}

CausalEstimate hajek_estimate(std::span<const std::uint8_t> treated, std::span<const double> outcomes,
                              std::span<const double> propensities) {
  if (treated.size() != outcomes.size() || treated.size() != propensities.size()) {
    throw std::invalid_argument("arm labels, outcomes, and propensities are misaligned");
  }
  CausalEstimate est;
  double wt = 0.0, wyt = 0.0, wc = 0.0, wyc = 0.0, psum = 0.0;
  est.propensity_min = 1.0;
  est.propensity_max = 0.0;
  for (std::size_t i = 0; i < treated.size(); ++i) {
    const double e = propensities[i];
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("propensity outside (0, 1)");
    if (treated[i]) {
      wt += 1.0 / e;
      wyt += outcomes[i] / e;
      est.treated_count++;
    } else {
      wc += 1.0 / (1.0 - e);
      wyc += outcomes[i] / (1.0 - e);
      est.control_count++;
    }
    est.propensity_min = std::min(est.propensity_min, e);
    est.propensity_max = std::max(est.propensity_max, e);
    psum += e;
  }
  if (est.treated_count == 0 || est.control_count == 0) {
    throw DegenerateArmError("IPW estimate needs both arms non-empty");
  }
  est.treated_mean = wyt / wt;
  est.control_mean = wyc / wc;
  est.ace = est.treated_mean - est.control_mean;
  est.propensity_mean = psum / static_cast<double>(treated.size());
  return est;
}

CausalEstimate estimate_ace(const LabeledSamples& samples, const PropensityModel& model) {
  std::vector<std::uint8_t> arm;
  std::vector<double> y, e;
  for (const auto& s : samples.samples) {
    arm.push_back(s.treated ? 1 : 0);
    y.push_back(s.outcome);
    e.push_back(model.predict(s.covariates));
  }
  return hajek_estimate(arm, y, e);
}

double naive_difference(const LabeledSamples& samples) {
  double st = 0.0, sc = 0.0;
  std::size_t nt = 0, nc = 0;
  for (const auto& s : samples.samples) {
    if (s.treated) {
      st += s.outcome;
      ++nt;
    } else {
      sc += s.outcome;
      ++nc;
    }
  }
  if (nt == 0 || nc == 0) throw DegenerateArmError("difference of means needs both arms non-empty");
  return st / static_cast<double>(nt) - sc / static_cast<double>(nc);
}

double ccs_score(std::span<const double> predicted, std::span<const double> truth) {
  if (truth.empty()) throw UnsupportedDatasetError("no ground-truth counterfactuals to score against");
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("counterfactual predictions (" + std::to_string(predicted.size()) +
                                ") and ground truth (" + std::to_string(truth.size()) + ") differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double denom = std::max(std::abs(truth[i]), 0.1);
    total += std::max(0.0, 1.0 - std::abs(predicted[i] - truth[i]) / denom);
  }
  return total / static_cast<double>(truth.size());
}

}  // namespace dss::causal
