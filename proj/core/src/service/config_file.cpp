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

#include "dss/service/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dss::service {

namespace {

using json = nlohmann::json;
using synth::ConfigError;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t as_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double as_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    if (!out.emplace(key, value).second) throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
  }
  return out;
}

RunConfig apply_key_values(const std::map<std::string, std::string>& kv, RunConfig c) {
  json data = json::parse(c.data.to_json());
  bool touched_data = false;
  for (const auto& [key, v] : kv) {
    if (key.rfind("data.", 0) == 0) {
      const std::string field = key.substr(5);
      if (!data.contains(field)) throw ConfigError("unknown config key '" + key + "'");
      if (data[field].is_string()) data[field] = v;
      else data[field] = data[field].is_number_float() ? json(as_double(key, v)) : json(as_size(key, v));
      touched_data = true;
    } else if (key == "model.family") c.model.family = train::parse_model_family(v);
    else if (key == "model.window") c.model.window = as_size(key, v);
    else if (key == "model.horizon") c.model.horizon = as_size(key, v);
    else if (key == "model.gnn_hidden") c.model.gnn.hidden_dim = as_size(key, v);
    else if (key == "model.gnn_layers") c.model.gnn.layers = as_size(key, v);
    else if (key == "model.negative_slope") c.model.gnn.negative_slope = as_double(key, v);
    else if (key == "model.neighbor_mode") {
      if (v == "incoming") c.model.gnn.neighbor_mode = graph::NeighborMode::kIncoming;
      else if (v == "symmetric") c.model.gnn.neighbor_mode = graph::NeighborMode::kSymmetric;
      else throw ConfigError(key + ": expected incoming or symmetric");
    } else if (key == "model.d_model") c.model.transformer.d_model = as_size(key, v);
    else if (key == "model.heads") c.model.transformer.heads = as_size(key, v);
    else if (key == "model.layers") c.model.transformer.layers = as_size(key, v);
    else if (key == "model.ff_dim") c.model.transformer.ff_dim = as_size(key, v);
    else if (key == "model.max_positions") c.model.transformer.max_positions = as_size(key, v);
    else if (key == "model.period") c.model.transformer.period = as_size(key, v);
    else if (key == "model.gru_hidden") c.model.gru_hidden = as_size(key, v);
    else if (key == "train.epochs") c.train.epochs = as_size(key, v);
    else if (key == "train.batch_size") c.train.batch_size = as_size(key, v);
    else if (key == "train.learning_rate") c.train.learning_rate = as_double(key, v);
    else if (key == "train.optimizer") {
      try {
        c.train.optimizer = num::parse_optimizer_kind(v);
      } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
      }
    } else if (key == "train.weight_decay") c.train.weight_decay = as_double(key, v);
    else if (key == "train.patience") c.train.patience = as_size(key, v);
    else if (key == "train.validation_fraction") c.train.validation_fraction = as_double(key, v);
    else if (key == "train.test_fraction") c.train.test_fraction = as_double(key, v);
    else if (key == "train.seed") c.train.seed = as_size(key, v);
    else if (key == "train.train_stride") c.train.train_stride = as_size(key, v);
    else if (key == "train.eval_stride") c.train.eval_stride = as_size(key, v);
    else if (key == "loss.lambda1") c.loss.forecast_weight = as_double(key, v);
    else if (key == "loss.lambda2") c.loss.anomaly_weight = as_double(key, v);
    else if (key == "loss.anomaly_class_weight") c.loss.positive_class_weight = as_double(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  if (touched_data) c.data = synth::GeneratorConfig::from_json(data.dump());
  c.model.validate();
  c.train.validate();
  c.loss.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return apply_key_values(parse_key_values(ss.str()), std::move(base));
}

std::string to_key_values(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  const json data = json::parse(c.data.to_json());
  for (const auto& [k, v] : data.items()) out << "data." << k << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  const auto& m = c.model;
  out << "model.family = " << train::to_string(m.family) << '\n'
      << "model.window = " << m.window << '\n'
      << "model.horizon = " << m.horizon << '\n'
      << "model.gnn_hidden = " << m.gnn.hidden_dim << '\n'
      << "model.gnn_layers = " << m.gnn.layers << '\n'
      << "model.negative_slope = " << m.gnn.negative_slope << '\n'
      << "model.neighbor_mode = " << (m.gnn.neighbor_mode == graph::NeighborMode::kIncoming ? "incoming" : "symmetric") << '\n'
      << "model.d_model = " << m.transformer.d_model << '\n'
      << "model.heads = " << m.transformer.heads << '\n'
      << "model.layers = " << m.transformer.layers << '\n'
      << "model.ff_dim = " << m.transformer.ff_dim << '\n'
      << "model.max_positions = " << m.transformer.max_positions << '\n'
      << "model.period = " << m.transformer.period << '\n'
      << "model.gru_hidden = " << m.gru_hidden << '\n';
  const auto& t = c.train;
  out << "train.epochs = " << t.epochs << '\n'
      << "train.batch_size = " << t.batch_size << '\n'
      << "train.learning_rate = " << t.learning_rate << '\n'
      << "train.optimizer = " << num::to_string(t.optimizer) << '\n'
      << "train.weight_decay = " << t.weight_decay << '\n'
      << "train.patience = " << t.patience << '\n'
      << "train.validation_fraction = " << t.validation_fraction << '\n'
      << "train.test_fraction = " << t.test_fraction << '\n'
      << "train.seed = " << t.seed << '\n'
      << "train.train_stride = " << t.train_stride << '\n'
      << "train.eval_stride = " << t.eval_stride << '\n';
  out << "loss.lambda1 = " << c.loss.forecast_weight << '\n'
      << "loss.lambda2 = " << c.loss.anomaly_weight << '\n'
      << "loss.anomaly_class_weight = " << c.loss.positive_class_weight << '\n';
  return out.str();
}

RunConfig desk_scale_config() {
  RunConfig c;
  c.model.gnn.hidden_dim = 16;
  c.model.transformer.d_model = 32;
  c.model.transformer.ff_dim = 64;
  c.model.gru_hidden = 32;
  c.train.learning_rate = 1e-3;
  c.train.train_stride = 16;
  c.train.eval_stride = 16;
  return c;
}

}  // namespace dss::service
