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

#include "dss/train/features.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace dss::train {

namespace {

using json = nlohmann::json;

std::size_t kind_slot(graph::NodeKind k) {
  switch (k) {
    case graph::NodeKind::kUser: return 0;
    case graph::NodeKind::kBrand: return 1;
    case graph::NodeKind::kContent: return 2;
  }
  return 0;
}

}  // namespace

std::vector<std::size_t> exogenous_columns() {
  auto cols = synth::domain_columns(synth::Domain::kAd);
  const auto consumer = synth::domain_columns(synth::Domain::kConsumer);
  cols.insert(cols.end(), consumer.begin(), consumer.end());
  return cols;
}

std::string Normalization::to_json() const {
  return json{{"columns", columns},
              {"mean", mean},
              {"scale", scale},
              {"target_mean", target_mean},
              {"target_scale", target_scale}}
      .dump();
}

Normalization Normalization::from_json(const std::string& text) {
  const json j = json::parse(text);
  Normalization n;
  n.columns = j.at("columns").get<std::vector<std::size_t>>();
  n.mean = j.at("mean").get<std::vector<double>>();
  n.scale = j.at("scale").get<std::vector<double>>();
  n.target_mean = j.at("target_mean").get<double>();
  n.target_scale = j.at("target_scale").get<double>();
  if (n.mean.size() != n.columns.size() || n.scale.size() != n.columns.size()) {
    throw synth::SchemaError("normalization arrays disagree in length");
  }
  return n;
}

Normalization fit_normalization(const synth::TimeSeriesDataset& data, std::size_t train_end) {
  if (data.series.empty() || train_end == 0) throw synth::ConfigError("normalization needs training steps");
  train_end = std::min(train_end, data.steps);
  Normalization n;
  n.columns = exogenous_columns();
  auto moments = [&](auto&& value_of) {
    double s = 0.0, ss = 0.0;
    std::size_t count = 0;
    for (const auto& sd : data.series) {
      for (std::size_t t = 0; t < train_end; ++t) {
        const double v = value_of(sd, t);
        s += v;
        ss += v * v;
        ++count;
      }
    }
    const double m = s / static_cast<double>(count);
    const double var = std::max(0.0, ss / static_cast<double>(count) - m * m);
    return std::pair{m, var > 1e-18 ? std::sqrt(var) : 1.0};
  };
  for (std::size_t c : n.columns) {
    auto [m, sd] = moments([c](const synth::SeriesData& s, std::size_t t) { return s.features[c][t]; });
    n.mean.push_back(m);
    n.scale.push_back(sd);
  }
  auto [m, sd] = moments([](const synth::SeriesData& s, std::size_t t) { return s.target[t]; });
  n.target_mean = m;
  n.target_scale = sd;
  return n;
}

std::vector<FeatureRange> feature_ranges(const synth::TimeSeriesDataset& data) {
  std::vector<FeatureRange> out;
  const auto& schema = synth::feature_schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    FeatureRange r{schema[c].name, INFINITY, -INFINITY};
    for (const auto& sd : data.series) {
      for (double v : sd.features[c]) {
        r.min = std::min(r.min, v);
        r.max = std::max(r.max, v);
      }
    }
    if (r.min > r.max) r.min = r.max = 0.0;
    out.push_back(r);
  }
  return out;
}

SplitPlan plan_splits(std::size_t series, std::size_t steps, std::size_t window, std::size_t horizon,
                      double validation_fraction, double test_fraction, std::size_t train_stride,
                      std::size_t eval_stride) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw synth::ConfigError("validation fraction must be in (0, 1)");
  }
  if (!(test_fraction >= 0.0 && test_fraction < 1.0) || validation_fraction + test_fraction >= 1.0) {
    throw synth::ConfigError("validation + test fractions must leave training data");
  }
  if (window == 0 || horizon == 0) throw synth::ConfigError("window and horizon must be positive");
  if (train_stride == 0 || eval_stride == 0) throw synth::ConfigError("strides must be positive");
  SplitPlan plan;
  const double total = static_cast<double>(steps);
  plan.train_end = static_cast<std::size_t>(std::lround(total * (1.0 - validation_fraction - test_fraction)));
  plan.validation_end = static_cast<std::size_t>(std::lround(total * (1.0 - test_fraction)));
  if (steps < window + horizon) return plan;

  // Window with first target step f = start + window and last target f + horizon - 1.
  auto collect = [&](std::size_t first_target_lo, std::size_t last_target_hi, std::size_t stride,
                     std::vector<WindowRef>& out) {
    const std::size_t lo = first_target_lo > window ? first_target_lo - window : 0;
    if (last_target_hi + 1 < window + horizon) return;
    const std::size_t hi = last_target_hi + 1 - window - horizon;  // inclusive max start
    for (std::size_t s = 0; s < series; ++s) {
      for (std::size_t start = lo; start <= hi; start += stride) out.push_back({s, start});
    }
  };
  if (plan.train_end >= 1) collect(0, plan.train_end - 1, train_stride, plan.train);
  if (plan.validation_end > plan.train_end) collect(plan.train_end, plan.validation_end - 1, eval_stride, plan.validation);
  if (steps > plan.validation_end) collect(plan.validation_end, steps - 1, eval_stride, plan.test);
  return plan;
}

BatchSource source_of(const synth::Bundle& bundle) { return {&bundle.graph, &bundle.nodes, &bundle.data}; }

num::Tensor node_features(const BatchSource& source, std::size_t series, std::size_t end, std::size_t window) {
  const auto& g = *source.graph;
  const auto& sd = source.data->series.at(series);
  const std::size_t n = g.node_count();
  num::Tensor x({n, kNodeFeatureDim});
  for (std::size_t lag = 0; lag < kActivityLags && lag <= end; ++lag) {
    if (sd.active.empty()) break;
    for (std::uint32_t v : sd.active.at(end - lag)) x.at(v, lag) = 1.0;
  }
  const std::size_t sent = synth::feature_index("sentiment");
  const std::size_t first = end + 1 >= window ? end + 1 - window : 0;
  double mean_sent = 0.0;
  for (std::size_t t = first; t <= end; ++t) mean_sent += sd.features[sent][t];
  mean_sent /= static_cast<double>(end + 1 - first);
  for (std::size_t i = 0; i < n; ++i) {
    const double bias = source.nodes && i < source.nodes->sentiment_bias.size() ? source.nodes->sentiment_bias[i] : 0.0;
    x.at(i, kActivityLags) = mean_sent + bias;
    x.at(i, kActivityLags + 1 + kind_slot(g.nodes()[i].kind)) = 1.0;
  }
  return x;
}

Batch make_batch(const BatchSource& source, const Normalization& norm, std::span<const WindowRef> refs,
                 std::size_t window, std::size_t horizon, bool with_graph, graph::NeighborMode mode,
                 std::span<const ColumnOverride> overrides) {
  const auto& data = *source.data;
  const std::size_t b = refs.size(), x = norm.columns.size();
  if (b == 0) throw std::invalid_argument("empty batch");
  Batch out;
  out.size = b;
  out.window = window;
  out.horizon = horizon;
  out.exogenous = num::Tensor({b, window, x});
  out.targets = num::Tensor({b, horizon});
  out.labels = num::Tensor({b, window});
  out.last_target = num::Tensor({b});
  out.refs.assign(refs.begin(), refs.end());

  std::vector<double> forced(x, NAN);
  for (const auto& o : overrides) {
    auto it = std::find(norm.columns.begin(), norm.columns.end(), o.column);
    if (it == norm.columns.end()) throw std::invalid_argument("override column is not a model input");
    forced[static_cast<std::size_t>(it - norm.columns.begin())] = o.value;
  }

  std::size_t n = 0;
  if (with_graph) {
    n = source.graph->node_count();
    out.node_features = num::Tensor({b * n, kNodeFeatureDim});
  }
  for (std::size_t r = 0; r < b; ++r) {
    const auto [s, start] = refs[r];
    const auto& sd = data.series.at(s);
    const std::size_t end = start + window - 1;
    if (end >= data.steps) throw std::out_of_range("window runs past the end of the series");
    out.starts.push_back(start);
    for (std::size_t t = 0; t < window; ++t) {
      for (std::size_t c = 0; c < x; ++c) {
        const double raw = std::isnan(forced[c]) ? sd.features[norm.columns[c]][start + t] : forced[c];
        out.exogenous[(r * window + t) * x + c] = norm.normalize(c, raw);
      }
      out.labels[r * window + t] = sd.anomaly[start + t] ? 1.0 : 0.0;
    }
    for (std::size_t h = 0; h < horizon; ++h) {
      const std::size_t t = end + 1 + h;
      if (t < data.steps) out.targets[r * horizon + h] = (sd.target[t] - norm.target_mean) / norm.target_scale;
    }
    out.last_target[r] = (sd.target[end] - norm.target_mean) / norm.target_scale;
    if (with_graph) {
      const num::Tensor block = node_features(source, s, end, window);
      std::copy(block.data().begin(), block.data().end(), out.node_features.data().begin() + r * n * kNodeFeatureDim);
    }
  }
  if (with_graph) out.edges = graph::message_edges(*source.graph, mode, b);
  return out;
}

}  // namespace dss::train
