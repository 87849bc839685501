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

#include "dss/train/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace dss::train {

using num::Tensor;

namespace {

using json = nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::vector<ColumnOverride> override_for(const causal::InterventionSpec& spec, double level) {
  return {ColumnOverride{synth::feature_index(spec.treatment), level}};
}

}  // namespace

bool EvalReport::invariants_hold() const {
  if (!(mae >= 0.0) || !(rmse >= mae - 1e-12)) return false;
  if (!std::isnan(r2) && r2 > 1.0) return false;
  if (!(f1 >= 0.0 && f1 <= 1.0)) return false;
  if (ccs && !(*ccs >= 0.0 && *ccs <= 1.0)) return false;
  return true;
}

std::string EvalReport::to_json() const {
  json j;
  j["model"] = model;
  j["dataset_fingerprint"] = dataset_fingerprint;
  j["windows"] = windows;
  j["forecast_points"] = forecast_points;
  j["rmse"] = rmse;
  j["mae"] = mae;
  j["r2"] = std::isnan(r2) ? json(nullptr) : json(r2);
  j["f1"] = f1;
  j["anomaly_confusion"] = {{"tp", anomaly.tp}, {"fp", anomaly.fp}, {"tn", anomaly.tn}, {"fn", anomaly.fn}};
  j["ate_error"] = optional_number(ate_error);
  j["ccs"] = optional_number(ccs);
  j["ace_rollout"] = optional_number(ace_rollout);
  j["notes"] = notes;
  json c = json::array();
  for (const auto& r : curve) c.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_loss", r.validation_loss}});
  j["loss_curve"] = c;
  j["wall_clock_seconds"] = seconds;
  return j.dump(2);
}

EvalReport EvalReport::from_json(const std::string& text) {
  EvalReport r;
  try {
    const json j = json::parse(text);
    r.model = j.at("model").get<std::string>();
    r.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    r.windows = j.value("windows", std::size_t{0});
    r.forecast_points = j.value("forecast_points", std::size_t{0});
    r.rmse = j.at("rmse").get<double>();
    r.mae = j.at("mae").get<double>();
    r.r2 = j.at("r2").is_null() ? std::nan("") : j.at("r2").get<double>();
    r.f1 = j.at("f1").get<double>();
    if (j.contains("anomaly_confusion")) {
      const json& c = j.at("anomaly_confusion");
      r.anomaly = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("tn").get<std::size_t>(),
                   c.at("fn").get<std::size_t>()};
    }
    r.ate_error = read_optional(j, "ate_error");
    r.ccs = read_optional(j, "ccs");
    r.ace_rollout = read_optional(j, "ace_rollout");
    r.notes = j.value("notes", std::vector<std::string>{});
    for (const auto& e : j.value("loss_curve", json::array())) {
      r.curve.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(), e.at("val_loss").get<double>()});
    }
    r.seconds = j.value("wall_clock_seconds", 0.0);
  } catch (const json::exception& e) {
    throw synth::SchemaError(std::string("eval report: ") + e.what());
  }
  return r;
}

Predictor model_predictor(const Model& model) {
  return [model](const Batch& b) {
    auto out = model.forward(b);
    return Prediction{out.forecast.value(), out.anomaly_prob.value()};
  };
}

Predictor persistence_predictor() {
  return [](const Batch& b) {
    Prediction p{Tensor({b.size, b.horizon}), Tensor({b.size, b.window})};
    for (std::size_t r = 0; r < b.size; ++r) {
      for (std::size_t h = 0; h < b.horizon; ++h) p.forecast[r * b.horizon + h] = b.last_target[r];
    }
    return p;
  };
}

EvalTarget test_target(const synth::Bundle& bundle, const Normalization& norm, const ModelConfig& model,
                       const TrainConfig& config) {
  EvalTarget t;
  t.bundle = &bundle;
  t.normalization = &norm;
  t.window = model.window;
  t.horizon = model.horizon;
  t.uses_graph = model.family == ModelFamily::kHybrid;
  t.mode = model.gnn.neighbor_mode;
  t.windows = plan_splits(bundle.data.series_count(), bundle.data.steps, model.window, model.horizon,
                          config.validation_fraction, config.test_fraction, config.train_stride, config.eval_stride)
                  .test;
  return t;
}

EvalReport evaluate(const std::string& name, const Predictor& predictor, const EvalTarget& target,
                    const EvalOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (target.windows.empty()) throw synth::ConfigError("evaluation split is empty");
  const synth::Bundle& bundle = *target.bundle;
  const Normalization& norm = *target.normalization;
  const BatchSource source = source_of(bundle);
  const auto& steps = bundle.data.steps;

  const bool do_cf = options.counterfactuals && bundle.truth.has_counterfactuals();
  if (do_cf) options.intervention.validate();

  std::vector<double> pred, truth, probs, labels, cf_pred, cf_truth;
  double delta_sum = 0.0;
  std::size_t delta_count = 0;
  const std::span<const WindowRef> all(target.windows);
  for (std::size_t i = 0; i < all.size(); i += options.batch_size) {
    const auto chunk = all.subspan(i, std::min(options.batch_size, all.size() - i));
    Batch b = make_batch(source, norm, chunk, target.window, target.horizon, target.uses_graph, target.mode);
    const Prediction p = predictor(b);
    for (std::size_t r = 0; r < b.size; ++r) {
      const std::size_t end = chunk[r].start + target.window - 1;
      for (std::size_t h = 0; h < target.horizon; ++h) {
        if (end + 1 + h >= steps) continue;
        pred.push_back(p.forecast[r * target.horizon + h]);
        truth.push_back(b.targets[r * target.horizon + h]);
      }
    }
    probs.insert(probs.end(), p.anomaly_prob.data().begin(), p.anomaly_prob.data().end());
    labels.insert(labels.end(), b.labels.data().begin(), b.labels.data().end());

    if (do_cf) {
      const auto& spec = options.intervention;
      const auto o0 = override_for(spec, spec.a0), o1 = override_for(spec, spec.a1);
      const Prediction p0 = predictor(make_batch(source, norm, chunk, target.window, target.horizon, target.uses_graph,
                                                 target.mode, o0));
      const Prediction p1 = predictor(make_batch(source, norm, chunk, target.window, target.horizon, target.uses_graph,
                                                 target.mode, o1));
      for (std::size_t r = 0; r < b.size; ++r) {
        const auto [s, start] = chunk[r];
        for (std::size_t h = 0; h < target.horizon; ++h) {
          const std::size_t t = start + target.window + h;
          if (t >= steps) continue;
          const double y0 = norm.target_to_raw(p0.forecast[r * target.horizon + h]);
          const double y1 = norm.target_to_raw(p1.forecast[r * target.horizon + h]);
          cf_pred.push_back(y0);
          cf_truth.push_back(bundle.truth.outcome_a0[s][t]);
          cf_pred.push_back(y1);
          cf_truth.push_back(bundle.truth.outcome_a1[s][t]);
          delta_sum += y1 - y0;
          ++delta_count;
        }
      }
    }
  }

  EvalReport rep;
  rep.model = name;
  rep.dataset_fingerprint = synth::dataset_fingerprint(bundle.data);
  rep.windows = target.windows.size();
  rep.forecast_points = pred.size();
  const auto m = regression_metrics(pred, truth);
  rep.rmse = m.rmse;
  rep.mae = m.mae;
  rep.r2 = m.r2;
  if (!m.r2_note.empty()) rep.notes.push_back(m.r2_note);
  rep.anomaly = confusion(probs, labels, options.threshold);
  rep.f1 = rep.anomaly.f1();
  if (do_cf && delta_count > 0) {
    rep.ace_rollout = delta_sum / static_cast<double>(delta_count);
    rep.ate_error = std::abs(*rep.ace_rollout - bundle.truth.ate);
    rep.ccs = causal::ccs_score(cf_pred, cf_truth);
  } else {
    rep.notes.push_back("no ground-truth counterfactuals; ATE error and CCS skipped");
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

BaselineKind parse_baseline_kind(const std::string& s) {
  if (s == "persistence") return BaselineKind::kPersistence;
  if (s == "gru") return BaselineKind::kGru;
  throw synth::ConfigError("unknown baseline '" + s + "' (expected persistence or gru)");
}

EvalReport run_baseline(BaselineKind kind, const synth::Bundle& bundle, const BaselineConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  ModelConfig mc = config.gru;
  mc.family = ModelFamily::kGru;
  if (kind == BaselineKind::kPersistence) {
    config.train.validate();
    const auto plan = plan_splits(bundle.data.series_count(), bundle.data.steps, mc.window, mc.horizon,
                                  config.train.validation_fraction, config.train.test_fraction,
                                  config.train.train_stride, config.train.eval_stride);
    const Normalization norm = fit_normalization(bundle.data, plan.train_end);
    EvalTarget target = test_target(bundle, norm, mc, config.train);
    target.uses_graph = false;
    EvalReport r = evaluate("persistence", persistence_predictor(), target, config.eval);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }
  TrainResult tr = train(mc, bundle, config.train, config.loss);
  EvalTarget target = test_target(bundle, tr.normalization, mc, config.train);
  EvalReport r = evaluate("gru", model_predictor(tr.model), target, config.eval);
  r.curve = tr.curve;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<EvalReport> compare(std::vector<EvalReport> reports) {
  if (reports.size() < 2) throw ComparabilityError("comparison needs at least two reports");
  for (const auto& r : reports) {
    if (r.dataset_fingerprint != reports.front().dataset_fingerprint) {
      throw ComparabilityError("reports '" + reports.front().model + "' and '" + r.model +
                               "' were computed on different datasets (" + reports.front().dataset_fingerprint +
                               " vs " + r.dataset_fingerprint + ")");
    }
  }
  std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
    if (a.rmse != b.rmse) return a.rmse < b.rmse;
    return a.mae < b.mae;
  });
  return reports;
}

std::string comparison_table(const std::vector<EvalReport>& ranked) {
  auto cell = [](const std::optional<double>& v) {
    std::ostringstream s;
    if (v) s << std::fixed << std::setprecision(4) << *v;
    else s << "-";
    return s.str();
  };
  std::ostringstream out;
  out << std::left << std::setw(6) << "rank" << std::setw(14) << "model" << std::setw(10) << "RMSE" << std::setw(10)
      << "MAE" << std::setw(10) << "F1" << std::setw(10) << "R2" << std::setw(12) << "ATE err" << "CCS\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    out << std::left << std::setw(6) << i + 1 << std::setw(14) << r.model << std::setw(10) << cell(r.rmse)
        << std::setw(10) << cell(r.mae) << std::setw(10) << cell(r.f1) << std::setw(10)
        << (std::isnan(r.r2) ? std::string("nan") : cell(r.r2)) << std::setw(12) << cell(r.ate_error) << cell(r.ccs)
        << '\n';
  }
  return out.str();
}

Counterfactual counterfactual_predict(const Predictor& predictor, const EvalTarget& target, const WindowRef& ref,
                                      const causal::InterventionSpec& spec) {
  spec.validate();
  const BatchSource source = source_of(*target.bundle);
  const Normalization& norm = *target.normalization;
  const WindowRef refs[] = {ref};
  const auto o0 = override_for(spec, spec.a0), o1 = override_for(spec, spec.a1);
  const Prediction p0 = predictor(make_batch(source, norm, refs, target.window, target.horizon, target.uses_graph,
                                             target.mode, o0));
  const Prediction p1 = predictor(make_batch(source, norm, refs, target.window, target.horizon, target.uses_graph,
                                             target.mode, o1));
  Counterfactual cf;
  for (std::size_t h = 0; h < target.horizon; ++h) {
    cf.trajectory_a0.push_back(norm.target_to_raw(p0.forecast[h]));
    cf.trajectory_a1.push_back(norm.target_to_raw(p1.forecast[h]));
    cf.per_step_delta.push_back(cf.trajectory_a1.back() - cf.trajectory_a0.back());
    cf.ace_rollout += cf.per_step_delta.back();
  }
  cf.ace_rollout /= static_cast<double>(target.horizon);
  return cf;
}

namespace {

std::vector<Tensor> last_layer_heads(const std::vector<Tensor>& attention) {
  std::vector<Tensor> heads;
  if (attention.empty()) return heads;
  const Tensor& last = attention.back();  // [1, H, T, T]
  const std::size_t h = last.dim(1), t = last.dim(2);
  for (std::size_t k = 0; k < h; ++k) {
    Tensor m({t, t});
    std::copy_n(last.data().begin() + k * t * t, t * t, m.data().begin());
    heads.push_back(std::move(m));
  }
  return heads;
}

}  // namespace

temporal::ForecastResult forecast_window(const Model& model, const EvalTarget& target, const WindowRef& ref) {
  const WindowRef refs[] = {ref};
  const Batch b = make_batch(source_of(*target.bundle), *target.normalization, refs, target.window, target.horizon,
                             model.uses_graph(), target.mode);
  auto out = model.forward(b);
  temporal::ForecastResult r;
  r.horizon = target.horizon;
  for (std::size_t h = 0; h < target.horizon; ++h) {
    r.values.push_back(target.normalization->target_to_raw(out.forecast.value()[h]));
  }
  r.anomaly_probs = out.anomaly_prob.value().values();
  r.attention = last_layer_heads(out.attention);
  r.window_end = ref.start + target.window - 1;
  return r;
}

Explanation explain_window(const Model& model, const EvalTarget& target, const WindowRef& ref, std::size_t top) {
  const WindowRef refs[] = {ref};
  const Batch b = make_batch(source_of(*target.bundle), *target.normalization, refs, target.window, target.horizon,
                             model.uses_graph(), target.mode);
  auto out = model.forward(b, true);
  Explanation ex;
  ex.temporal_attention = last_layer_heads(out.attention);
  for (const auto& m : ex.temporal_attention) {
    const std::size_t t = m.dim(0);
    for (std::size_t i = 0; i < t; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < t; ++j) s += m.at(i, j);
      ex.attention_row_sums.push_back(s);
    }
  }
  if (model.uses_graph() && b.edges) {
    const auto& g = target.bundle->graph;
    std::vector<double> score(g.node_count(), 0.0);
    for (const auto& alpha : out.graph_trace.alpha) {
      for (std::size_t e = 0; e < alpha.size(); ++e) score[(*b.edges->sender)[e]] += alpha[e];
    }
    std::vector<std::size_t> order(score.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return score[a] > score[c]; });
    for (std::size_t i = 0; i < std::min(top, order.size()); ++i) {
      ex.top_influencers.push_back({g.nodes()[order[i]].id, score[order[i]]});
    }
  }
  return ex;
}

}  // namespace dss::train
