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

#include "dss/synth/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace dss::synth {

namespace {

using json = nlohmann::json;

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string topology_name(Topology t) {
  return t == Topology::kErdosRenyi ? "erdos_renyi" : "preferential_attachment";
}

Topology parse_topology(const std::string& s) {
  if (s == "erdos_renyi") return Topology::kErdosRenyi;
  if (s == "preferential_attachment") return Topology::kPreferentialAttachment;
  throw ConfigError("unknown topology '" + s + "'");
}

std::vector<graph::NodeKind> assign_kinds(std::size_t n, std::mt19937_64& rng) {
  // 70% users, 10% brands, remainder content.
  const auto users = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(n)));
  const auto brands = std::min(n - users, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n))));
  std::vector<graph::NodeKind> kinds(n, graph::NodeKind::kContent);
  std::fill_n(kinds.begin(), users, graph::NodeKind::kUser);
  std::fill_n(kinds.begin() + static_cast<long>(users), brands, graph::NodeKind::kBrand);
  std::shuffle(kinds.begin(), kinds.end(), rng);
  return kinds;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (nodes < 2) throw ConfigError("node count must be >= 2");
  if (series == 0) throw ConfigError("series count must be >= 1");
  require_probability(edge_probability, "edge_probability");
  require_probability(anomaly_rate, "anomaly_rate");
  require_probability(virality_min, "virality_min");
  require_probability(virality_max, "virality_max");
  require_probability(wave_rate_min, "wave_rate_min");
  require_probability(wave_rate_max, "wave_rate_max");
  if (virality_min > virality_max || wave_rate_min > wave_rate_max) {
    throw ConfigError("range minimum exceeds maximum");
  }
  if (topology == Topology::kPreferentialAttachment && (attachment_edges == 0 || attachment_edges >= nodes)) {
    throw ConfigError("attachment_edges must be in [1, nodes)");
  }
  if (window == 0 || horizon == 0) throw ConfigError("window and horizon must be >= 1");
  if (steps < window + horizon) {
    throw ConfigError("steps " + std::to_string(steps) + " shorter than window + horizon " +
                      std::to_string(window + horizon));
  }
  if (!(noise_scale >= 0.0) || max_wave_seeds == 0 || burn_in < 8) {
    throw ConfigError("noise_scale >= 0, max_wave_seeds >= 1 and burn_in >= 8 required");
  }
}

std::string GeneratorConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["nodes"] = nodes;
  j["topology"] = topology_name(topology);
  j["edge_probability"] = edge_probability;
  j["attachment_edges"] = attachment_edges;
  j["series"] = series;
  j["steps"] = steps;
  j["window"] = window;
  j["horizon"] = horizon;
  j["anomaly_rate"] = anomaly_rate;
  j["treatment_effect"] = treatment_effect;
  j["confounding"] = confounding;
  j["noise_scale"] = noise_scale;
  j["virality_min"] = virality_min;
  j["virality_max"] = virality_max;
  j["wave_rate_min"] = wave_rate_min;
  j["wave_rate_max"] = wave_rate_max;
  j["max_wave_seeds"] = max_wave_seeds;
  j["engagement_weight"] = engagement_weight;
  j["anomaly_spike"] = anomaly_spike;
  j["burn_in"] = burn_in;
  return j.dump();
}

GeneratorConfig GeneratorConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("generator config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
  GeneratorConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "nodes") c.nodes = value.get<std::size_t>();
      else if (key == "topology") c.topology = parse_topology(value.get<std::string>());
      else if (key == "edge_probability") c.edge_probability = value.get<double>();
      else if (key == "attachment_edges") c.attachment_edges = value.get<std::size_t>();
      else if (key == "series") c.series = value.get<std::size_t>();
      else if (key == "steps") c.steps = value.get<std::size_t>();
      else if (key == "window") c.window = value.get<std::size_t>();
      else if (key == "horizon") c.horizon = value.get<std::size_t>();
      else if (key == "anomaly_rate") c.anomaly_rate = value.get<double>();
      else if (key == "treatment_effect") c.treatment_effect = value.get<double>();
      else if (key == "confounding") c.confounding = value.get<double>();
      else if (key == "noise_scale") c.noise_scale = value.get<double>();
      else if (key == "virality_min") c.virality_min = value.get<double>();
      else if (key == "virality_max") c.virality_max = value.get<double>();
      else if (key == "wave_rate_min") c.wave_rate_min = value.get<double>();
      else if (key == "wave_rate_max") c.wave_rate_max = value.get<double>();
      else if (key == "max_wave_seeds") c.max_wave_seeds = value.get<std::size_t>();
      else if (key == "engagement_weight") c.engagement_weight = value.get<double>();
      else if (key == "anomaly_spike") c.anomaly_spike = value.get<double>();
      else if (key == "burn_in") c.burn_in = value.get<std::size_t>();
      else throw ConfigError("unknown generator config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("generator config has a mistyped field: ") + e.what());
  }
  c.validate();
  return c;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GraphSample generate_graph(const GeneratorConfig& config) {
  config.validate();
  std::mt19937_64 rng(mix_seed(config.seed, 0));
  const std::size_t n = config.nodes;
  const auto kinds = assign_kinds(n, rng);
  std::vector<graph::GraphNode> nodes;
  nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({i, kinds[i]});

  std::uniform_int_distribution<int> edge_kind(0, 2);
  std::vector<graph::GraphEdge> edges;
  auto add_edge = [&](std::size_t src, std::size_t dst) {
    edges.push_back({src, dst, static_cast<graph::EdgeKind>(edge_kind(rng))});
  };
  if (config.topology == Topology::kErdosRenyi) {
    std::bernoulli_distribution coin(config.edge_probability);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && coin(rng)) add_edge(i, j);
  } else {
    // Each arriving node follows m existing nodes picked proportionally to degree + 1;
    // influence flows from the followed node to the newcomer.
    const std::size_t m = config.attachment_edges;
    std::vector<double> degree(n, 0.0);
    for (std::size_t v = m; v < n; ++v) {
      std::vector<std::size_t> picked;
      while (picked.size() < m) {
        std::vector<double> w(v);
        for (std::size_t u = 0; u < v; ++u)
          w[u] = std::find(picked.begin(), picked.end(), u) == picked.end() ? degree[u] + 1.0 : 0.0;
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        picked.push_back(pick(rng));
      }
      for (std::size_t u : picked) {
        add_edge(u, v);
        degree[u] += 1.0;
        degree[v] += 1.0;
      }
    }
  }

  GraphSample sample{graph::DiffusionGraph(std::move(nodes), std::move(edges)), {}};
  std::normal_distribution<double> bias(0.0, 0.2);
  sample.nodes.sentiment_bias.resize(n);
  for (double& b : sample.nodes.sentiment_bias) b = bias(rng);
  return sample;
}

std::vector<int> run_independent_cascade(const graph::DiffusionGraph& graph,
                                         std::span<const std::size_t> seeds, double probability,
                                         std::mt19937_64& rng) {
  require_probability(probability, "transmission probability");
  std::vector<int> step(graph.node_count(), -1);
  std::vector<std::size_t> frontier;
  for (std::size_t s : seeds) {
    if (s >= graph.node_count()) throw graph::GraphError("cascade seed out of range");
    if (step[s] < 0) {
      step[s] = 0;
      frontier.push_back(s);
    }
  }
  std::bernoulli_distribution coin(probability);
  for (int t = 1; !frontier.empty(); ++t) {
    std::vector<std::size_t> next;
    for (std::size_t u : frontier) {
      for (std::size_t v : graph.out_neighbors(u)) {
        if (step[v] < 0 && coin(rng)) {
          step[v] = t;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  return step;
}

std::vector<CascadeStream> simulate_cascades(const graph::DiffusionGraph& graph,
                                             const GeneratorConfig& config) {
  config.validate();
  const std::size_t total = config.burn_in + config.steps;
  const std::size_t n = graph.node_count();
  std::vector<CascadeStream> streams(config.series);
  for (std::size_t s = 0; s < config.series; ++s) {
    std::mt19937_64 rng(mix_seed(config.seed, 2 * s + 1));
    CascadeStream& cs = streams[s];
    cs.virality = std::uniform_real_distribution<double>(config.virality_min, config.virality_max)(rng);
    const double wave_rate =
        std::uniform_real_distribution<double>(config.wave_rate_min, config.wave_rate_max)(rng);
    cs.active.assign(total, {});
    cs.shares.assign(total, 0.0);
    std::bernoulli_distribution wave(wave_rate);
    std::uniform_int_distribution<std::size_t> seed_count(1, config.max_wave_seeds);
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    for (std::size_t t = 0; t < total; ++t) {
      if (!wave(rng)) continue;
      std::vector<std::size_t> seeds(seed_count(rng));
      for (auto& v : seeds) v = node(rng);
      const auto reached = run_independent_cascade(graph, seeds, cs.virality, rng);
      for (std::size_t v = 0; v < n; ++v) {
        if (reached[v] < 0) continue;
        const std::size_t at = t + static_cast<std::size_t>(reached[v]);
        if (at >= total) continue;
        cs.active[at].push_back(static_cast<std::uint32_t>(v));
        if (reached[v] > 0) cs.shares[at] += 1.0;
      }
    }
    for (auto& step : cs.active) std::sort(step.begin(), step.end());
  }
  return streams;
}

Outcomes generate_outcomes(const std::vector<CascadeStream>& streams, const GraphSample& graph,
                           const GeneratorConfig& config) {
  config.validate();
  if (streams.size() != config.series) {
    throw ConfigError("expected " + std::to_string(config.series) + " cascade streams, got " +
                      std::to_string(streams.size()));
  }
  const std::size_t T = config.steps, burn = config.burn_in, total = burn + T;
  const double n = static_cast<double>(graph.graph.node_count());
  const auto& schema = feature_schema();
  const std::size_t f_eng = feature_index("engagement_rate"), f_share = feature_index("share_count"),
                    f_sent = feature_index("sentiment"), f_spend = feature_index("spend"),
                    f_impr = feature_index("impressions"), f_ctr = feature_index("ctr"),
                    f_cpc = feature_index("cpc"), f_conv = feature_index("conversion_rate"),
                    f_purch = feature_index("purchase_frequency"), f_dwell = feature_index("dwell_time"),
                    f_cprob = feature_index("conversion_probability");

  Outcomes out;
  out.data.steps = T;
  out.data.series.resize(config.series);
  GroundTruth& truth = out.truth;
  truth.ate = config.treatment_effect;
  truth.treated.resize(config.series);
  truth.outcome_a0.resize(config.series);
  truth.outcome_a1.resize(config.series);
  truth.anomaly_steps.resize(config.series);
  const double gamma = config.confounding, beta = config.treatment_effect;

  for (std::size_t s = 0; s < config.series; ++s) {
    std::mt19937_64 rng(mix_seed(config.seed, 2 * s + 2));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution anomaly(config.anomaly_rate);
    const CascadeStream& cs = streams[s];
    if (cs.active.size() != total) throw ConfigError("cascade stream length mismatch");

    const double sentiment = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const bool treated = std::bernoulli_distribution(sigmoid(2.0 * gamma * sentiment))(rng);
    const double a = treated ? 1.0 : 0.0;

    // Consumer latent state, AR(1) started from its stationary law.
    std::vector<double> latent(total);
    latent[0] = gauss(rng) * 0.3 / std::sqrt(1.0 - 0.81);
    for (std::size_t u = 1; u < total; ++u) latent[u] = 0.9 * latent[u - 1] + 0.3 * gauss(rng);
    std::vector<double> engagement(total);
    for (std::size_t u = 0; u < total; ++u) engagement[u] = static_cast<double>(cs.active[u].size()) / n;

    SeriesData& sd = out.data.series[s];
    sd.features.assign(schema.size(), std::vector<double>(T));
    sd.target.resize(T);
    sd.volatility.resize(T);
    sd.anomaly.resize(T);
    sd.active.assign(cs.active.begin() + static_cast<long>(burn), cs.active.end());
    auto& y0 = truth.outcome_a0[s];
    auto& y1 = truth.outcome_a1[s];
    y0.resize(T);
    y1.resize(T);
    truth.treated[s] = treated ? 1 : 0;

    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t u = burn + t;
      const bool spike = anomaly(rng);
      sd.anomaly[t] = spike ? 1 : 0;
      if (spike) truth.anomaly_steps[s].push_back(t);
      const double e = engagement[u], c = latent[u];

      sd.features[f_eng][t] = e;
      sd.features[f_share][t] = cs.shares[u];
      sd.features[f_sent][t] = std::clamp(sentiment + 0.2 * gauss(rng), -1.0, 1.0);
      const double spend = std::max(0.0, a + 0.1 * gauss(rng));
      sd.features[f_spend][t] = spend;
      sd.features[f_impr][t] = 1.0 + 2.0 * spend + 0.3 * gauss(rng);
      sd.features[f_ctr][t] = std::clamp(0.02 + 0.01 * sentiment + 0.005 * gauss(rng), 0.0, 1.0);
      sd.features[f_cpc][t] = std::max(0.01, 0.5 + 0.1 * gauss(rng));
      sd.features[f_conv][t] = sigmoid(-3.0 + 0.5 * sentiment + 0.2 * gauss(rng));
      sd.features[f_purch][t] = 1.0 + c + 0.5 * e + 0.3 * gauss(rng);
      sd.features[f_dwell][t] = 2.0 + 0.5 * sentiment + (spike ? 1.5 : 0.0) + 0.2 * gauss(rng);
      sd.features[f_cprob][t] = sigmoid(-1.0 + c + 0.2 * gauss(rng));

      double lagged = 0.0;
      for (std::size_t lag = 4; lag <= 7; ++lag) lagged += engagement[u - lag];
      const double g = 2.0 + gamma * sentiment + config.engagement_weight * lagged + 0.5 * latent[u - 4];
      const double base = g * (spike ? 1.0 + config.anomaly_spike : 1.0) + config.noise_scale * gauss(rng);
      sd.target[t] = base + beta * a;
      y0[t] = base + beta * truth.a0;
      y1[t] = base + beta * truth.a1;

      const std::size_t lo = t >= 7 ? t - 7 : 0;
      double mean = 0.0, sq = 0.0;
      for (std::size_t q = lo; q <= t; ++q) mean += sd.target[q];
      mean /= static_cast<double>(t - lo + 1);
      for (std::size_t q = lo; q <= t; ++q) sq += (sd.target[q] - mean) * (sd.target[q] - mean);
      sd.volatility[t] = std::sqrt(sq / static_cast<double>(t - lo + 1));
    }
  }
  return out;
}

Bundle generate(const GeneratorConfig& config) {
  GraphSample g = generate_graph(config);
  auto streams = simulate_cascades(g.graph, config);
  Outcomes o = generate_outcomes(streams, g, config);
  Bundle b;
  b.graph = std::move(g.graph);
  b.nodes = std::move(g.nodes);
  b.data = std::move(o.data);
  b.truth = std::move(o.truth);
  b.config_json = config.to_json();
  b.seed = config.seed;
  return b;
}

}  // namespace dss::synth
