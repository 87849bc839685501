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

#include "dss/synth/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dss::synth {

namespace {

using json = nlohmann::json;

void append_number(std::string& out, double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw SchemaError(where + ": cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_index(std::string_view s, const std::string& where) {
  std::size_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw SchemaError(where + ": cannot parse index '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

json parse_json_file(const std::filesystem::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw SchemaError(p.filename().string() + " is not valid JSON: " + e.what());
  }
}

std::string series_header() {
  std::string h = "series,step";
  for (const auto& c : feature_schema()) h += "," + c.name;
  h += ",volatility,target,anomaly";
  return h;
}

std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view v(text);
  std::size_t start = 0;
  while (start < v.size()) {
    std::size_t nl = v.find('\n', start);
    if (nl == std::string_view::npos) nl = v.size();
    lines.push_back(v.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace

const std::vector<FeatureColumn>& feature_schema() {
  static const std::vector<FeatureColumn> schema = {
      {"engagement_rate", Domain::kSocial},     {"share_count", Domain::kSocial},
      {"sentiment", Domain::kSocial},           {"spend", Domain::kAd},
      {"impressions", Domain::kAd},             {"ctr", Domain::kAd},
      {"cpc", Domain::kAd},                     {"conversion_rate", Domain::kAd},
      {"purchase_frequency", Domain::kConsumer}, {"dwell_time", Domain::kConsumer},
      {"conversion_probability", Domain::kConsumer},
  };
  return schema;
}

std::size_t feature_index(const std::string& name) {
  const auto& s = feature_schema();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i].name == name) return i;
  throw SchemaError("unknown feature column '" + name + "'");
}

std::vector<std::size_t> domain_columns(Domain domain) {
  std::vector<std::size_t> out;
  const auto& s = feature_schema();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i].domain == domain) out.push_back(i);
  return out;
}

void TimeSeriesDataset::validate() const {
  const std::size_t cols = feature_schema().size();
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sd = series[s];
    const std::string tag = "series " + std::to_string(s);
    if (sd.features.size() != cols) throw SchemaError(tag + ": wrong number of feature columns");
    for (const auto& col : sd.features)
      if (col.size() != steps) throw SchemaError(tag + ": misaligned feature column");
    if (sd.target.size() != steps || sd.volatility.size() != steps || sd.anomaly.size() != steps ||
        sd.active.size() != steps) {
      throw SchemaError(tag + ": misaligned target, label, or cascade stream");
    }
    for (auto l : sd.anomaly)
      if (l > 1) throw SchemaError(tag + ": anomaly labels must be binary");
  }
}

std::string series_csv(const TimeSeriesDataset& data) {
  std::string out = series_header() + "\n";
  out.reserve(data.series.size() * data.steps * 160);
  for (std::size_t s = 0; s < data.series.size(); ++s) {
    const auto& sd = data.series[s];
    for (std::size_t t = 0; t < data.steps; ++t) {
      out += std::to_string(s);
      out += ',';
      out += std::to_string(t);
      for (const auto& col : sd.features) {
        out += ',';
        append_number(out, col[t]);
      }
      out += ',';
      append_number(out, sd.volatility[t]);
      out += ',';
      append_number(out, sd.target[t]);
      out += ',';
      out += sd.anomaly[t] ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

std::string dataset_fingerprint(const TimeSeriesDataset& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : series_csv(data)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void export_dataset(const Bundle& bundle, const std::filesystem::path& dir) {
  bundle.data.validate();
  std::filesystem::create_directories(dir);

  json g;
  g["nodes"] = json::array();
  for (std::size_t i = 0; i < bundle.graph.node_count(); ++i) {
    const auto& n = bundle.graph.nodes()[i];
    json node{{"id", n.id}, {"kind", graph::to_string(n.kind)}};
    if (i < bundle.nodes.sentiment_bias.size()) node["sentiment_bias"] = bundle.nodes.sentiment_bias[i];
    g["nodes"].push_back(node);
  }
  g["edges"] = json::array();
  for (const auto& e : bundle.graph.edges())
    g["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"kind", graph::to_string(e.kind)}});
  write_file(dir / "graph.json", g.dump(1) + "\n");

  const std::string csv = series_csv(bundle.data);
  write_file(dir / "series.csv", csv);

  std::string cascades = "series,step,node\n";
  for (std::size_t s = 0; s < bundle.data.series.size(); ++s)
    for (std::size_t t = 0; t < bundle.data.steps; ++t)
      for (auto v : bundle.data.series[s].active[t])
        cascades += std::to_string(s) + "," + std::to_string(t) + "," + std::to_string(v) + "\n";
  write_file(dir / "cascades.csv", cascades);

  const GroundTruth& gt = bundle.truth;
  json truth{{"ate", gt.ate},
             {"treatment", gt.treatment},
             {"a0", gt.a0},
             {"a1", gt.a1},
             {"treated", gt.treated},
             {"outcome_a0", gt.outcome_a0},
             {"outcome_a1", gt.outcome_a1},
             {"anomaly_steps", gt.anomaly_steps}};
  write_file(dir / "ground_truth.json", truth.dump() + "\n");

  json manifest{{"schema_version", kSchemaVersion},
                {"seed", bundle.seed},
                {"series", bundle.data.series.size()},
                {"steps", bundle.data.steps},
                {"fingerprint", dataset_fingerprint(bundle.data)},
                {"files", {"graph.json", "series.csv", "cascades.csv", "ground_truth.json"}}};
  manifest["config"] = bundle.config_json.empty() ? json::object() : json::parse(bundle.config_json);
  write_file(dir / "manifest.json", manifest.dump(1) + "\n");
}

Bundle import_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest.json")) {
    throw SchemaError("no manifest.json in " + dir.string());
  }
  const json manifest = parse_json_file(dir / "manifest.json");
  const int version = manifest.value("schema_version", -1);
  if (version != kSchemaVersion) {
    throw SchemaError("dataset schema version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
  Bundle b;
  try {
    b.seed = manifest.at("seed").get<std::uint64_t>();
    const json& cfg = manifest.at("config");
    b.config_json = cfg.empty() ? std::string() : cfg.dump();
    const std::size_t series = manifest.at("series").get<std::size_t>();
    const std::size_t steps = manifest.at("steps").get<std::size_t>();

    const json g = parse_json_file(dir / "graph.json");
    std::vector<graph::GraphNode> nodes;
    for (const auto& n : g.at("nodes")) {
      nodes.push_back({n.at("id").get<std::uint64_t>(), graph::parse_node_kind(n.at("kind").get<std::string>())});
      if (n.contains("sentiment_bias")) b.nodes.sentiment_bias.push_back(n["sentiment_bias"].get<double>());
    }
    std::vector<graph::GraphEdge> edges;
    for (const auto& e : g.at("edges"))
      edges.push_back({e.at("src").get<std::uint64_t>(), e.at("dst").get<std::uint64_t>(),
                       graph::parse_edge_kind(e.at("kind").get<std::string>())});
    b.graph = graph::DiffusionGraph(std::move(nodes), std::move(edges));

    const std::size_t cols = feature_schema().size();
    b.data.steps = steps;
    b.data.series.resize(series);
    for (auto& sd : b.data.series) {
      sd.features.assign(cols, std::vector<double>(steps));
      sd.target.resize(steps);
      sd.volatility.resize(steps);
      sd.anomaly.resize(steps);
      sd.active.assign(steps, {});
    }
    const std::string csv = read_file(dir / "series.csv");
    const auto lines = lines_of(csv);
    if (lines.empty() || lines[0] != series_header()) throw SchemaError("series.csv header does not match schema");
    if (lines.size() != 1 + series * steps) throw SchemaError("series.csv has the wrong number of rows");
    for (std::size_t r = 1; r < lines.size(); ++r) {
      const std::string where = "series.csv line " + std::to_string(r + 1);
      const auto f = split(lines[r]);
      if (f.size() != cols + 5) throw SchemaError(where + ": wrong field count");
      const std::size_t s = parse_index(f[0], where), t = parse_index(f[1], where);
      if (s >= series || t >= steps) throw SchemaError(where + ": index out of range");
      auto& sd = b.data.series[s];
      for (std::size_t c = 0; c < cols; ++c) sd.features[c][t] = parse_double(f[2 + c], where);
      sd.volatility[t] = parse_double(f[2 + cols], where);
      sd.target[t] = parse_double(f[3 + cols], where);
      const std::size_t label = parse_index(f[4 + cols], where);
      if (label > 1) throw SchemaError(where + ": anomaly label must be 0 or 1");
      sd.anomaly[t] = static_cast<std::uint8_t>(label);
    }
    const std::string cas = read_file(dir / "cascades.csv");
    const auto clines = lines_of(cas);
    if (clines.empty() || clines[0] != "series,step,node") throw SchemaError("cascades.csv header mismatch");
    for (std::size_t r = 1; r < clines.size(); ++r) {
      const std::string where = "cascades.csv line " + std::to_string(r + 1);
      const auto f = split(clines[r]);
      if (f.size() != 3) throw SchemaError(where + ": wrong field count");
      const std::size_t s = parse_index(f[0], where), t = parse_index(f[1], where), v = parse_index(f[2], where);
      if (s >= series || t >= steps || v >= b.graph.node_count()) throw SchemaError(where + ": index out of range");
      b.data.series[s].active[t].push_back(static_cast<std::uint32_t>(v));
    }

    const json truth = parse_json_file(dir / "ground_truth.json");
    GroundTruth& gt = b.truth;
    gt.ate = truth.at("ate").get<double>();
    gt.treatment = truth.at("treatment").get<std::string>();
    gt.a0 = truth.at("a0").get<double>();
    gt.a1 = truth.at("a1").get<double>();
    gt.treated = truth.at("treated").get<std::vector<std::uint8_t>>();
    gt.outcome_a0 = truth.at("outcome_a0").get<std::vector<std::vector<double>>>();
    gt.outcome_a1 = truth.at("outcome_a1").get<std::vector<std::vector<double>>>();
    gt.anomaly_steps = truth.at("anomaly_steps").get<std::vector<std::vector<std::size_t>>>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("dataset files are malformed: ") + e.what());
  }
  b.data.validate();
  return b;
}

}  // namespace dss::synth
