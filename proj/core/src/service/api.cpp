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

#include "dss/service/api.hpp"

#include <algorithm>
#include <cmath>

#include <httplib.h>
#include <json.hpp>

namespace dss::service {

namespace {

using json = nlohmann::json;

json parse_body(const std::string& body) {
  if (body.empty()) throw schema_error("request body is empty; expected a JSON object");
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw schema_error(std::string("request body is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw schema_error("request body must be a JSON object");
  return j;
}

long long integer_field(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw bad_window(std::string("'") + key + "' must be an integer");
  return v.get<long long>();
}

json matrix_json(const num::Tensor& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(0); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.dim(1); ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

ApiError::ApiError(std::string code, const std::string& message, int status)
    : std::runtime_error(message), code_(std::move(code)), status_(status) {}

ApiError schema_error(const std::string& message) { return ApiError("schema_error", message, 400); }
ApiError bad_window(const std::string& message) { return ApiError("bad_window", message, 400); }
ApiError not_trained(const std::string& message) { return ApiError("not_trained", message, 503); }

std::string error_body(const std::string& code, const std::string& message) {
  return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

struct Service::Resolved {
  std::shared_ptr<const synth::Bundle> owned;  // raw windows only
  train::EvalTarget target;
  train::WindowRef ref;
};

Service::Service(std::optional<ModelCheckpoint> checkpoint, std::optional<synth::Bundle> data)
    : checkpoint_(std::move(checkpoint)), data_(std::move(data)) {
  if (checkpoint_) model_json_ = checkpoint_summary_json(*checkpoint_);
}

template <typename F>
ApiResponse Service::guarded(F&& f) const {
  try {
    return f();
  } catch (const ApiError& e) {
    return {e.status(), error_body(e.code(), e.what())};
  } catch (const causal::SpecError& e) {
    return {400, error_body("schema_error", e.what())};
  } catch (const synth::SchemaError& e) {
    return {400, error_body("schema_error", e.what())};
  } catch (const json::exception& e) {
    return {400, error_body("schema_error", std::string("malformed request: ") + e.what())};
  } catch (const std::exception& e) {
    return {500, error_body("internal", e.what())};
  }
}

Service::Resolved Service::resolve(const std::string& body, const std::map<std::string, std::string>* query) const {
  if (!checkpoint_) throw not_trained("no model is loaded; start the service with a trained checkpoint");
  const auto& mc = checkpoint_->model_config();
  const std::size_t tw = mc.window;
  Resolved r;
  r.target.normalization = &checkpoint_->normalization;
  r.target.window = tw;
  r.target.horizon = mc.horizon;
  r.target.uses_graph = checkpoint_->model.uses_graph();
  r.target.mode = mc.gnn.neighbor_mode;

  json j;
  if (query) {
    auto get = [&](const char* k) -> long long {
      auto it = query->find(k);
      if (it == query->end()) throw bad_window(std::string("missing query parameter '") + k + "'");
      try {
        std::size_t used = 0;
        const long long v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
      } catch (const std::exception&) {
        throw bad_window(std::string("query parameter '") + k + "' must be an integer");
      }
    };
    j = {{"series", get("series")}, {"t", get("t")}};
  } else {
    j = parse_body(body);
  }

  if (j.contains("window")) {
    const json& w = j.at("window");
    if (!w.is_array()) throw bad_window("'window' must be an array of per-step feature rows");
    if (w.size() != tw) {
      throw bad_window("window has " + std::to_string(w.size()) + " steps; the model expects exactly " +
                       std::to_string(tw));
    }
    const auto& cols = checkpoint_->normalization.columns;
    if (r.target.uses_graph && !data_) {
      throw bad_window("raw windows for a graph model need the diffusion graph; start the service with --data");
    }
    auto bundle = std::make_shared<synth::Bundle>();
    if (data_) {
      bundle->graph = data_->graph;
      bundle->nodes = data_->nodes;
    }
    synth::SeriesData sd;
    sd.features.assign(synth::feature_schema().size(), std::vector<double>(tw, 0.0));
    sd.target.assign(tw, 0.0);
    sd.volatility.assign(tw, 0.0);
    sd.anomaly.assign(tw, 0);
    sd.active.assign(tw, {});
    for (std::size_t t = 0; t < tw; ++t) {
      const json& row = w[t];
      if (!row.is_array() || row.size() != cols.size()) {
        throw bad_window("window row " + std::to_string(t) + " must hold " + std::to_string(cols.size()) +
                         " numbers (see exogenous_columns in /v1/model)");
      }
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (!row[c].is_number() || !std::isfinite(row[c].get<double>())) {
          throw bad_window("window row " + std::to_string(t) + " has a non-numeric entry");
        }
        sd.features[cols[c]][t] = row[c].get<double>();
      }
    }
    if (j.contains("sentiment")) {
      const json& s = j.at("sentiment");
      if (!s.is_array() || s.size() != tw) throw bad_window("'sentiment' must hold one number per window step");
      for (std::size_t t = 0; t < tw; ++t) sd.features[synth::feature_index("sentiment")][t] = s[t].get<double>();
    }
    if (j.contains("active")) {
      const json& a = j.at("active");
      if (!a.is_array() || a.size() != tw) throw bad_window("'active' must hold one node-id list per window step");
      for (std::size_t t = 0; t < tw; ++t) {
        for (const auto& id : a[t]) {
          try {
            sd.active[t].push_back(static_cast<std::uint32_t>(bundle->graph.index_of(id.get<std::uint64_t>())));
          } catch (const std::exception&) {
            throw bad_window("unknown node id in 'active' at step " + std::to_string(t));
          }
        }
      }
    }
    bundle->data.steps = tw;
    bundle->data.series.push_back(std::move(sd));
    r.owned = bundle;
    r.target.bundle = bundle.get();
    r.ref = {0, 0};
    return r;
  }

  if (!j.contains("series") || !j.contains("t")) {
    throw bad_window("request needs either 'window' rows or a 'series' id with window end 't'");
  }
  if (!data_) throw bad_window("series references need the dataset; start the service with --data");
  const long long s = integer_field(j, "series"), t = integer_field(j, "t");
  if (s < 0 || static_cast<std::size_t>(s) >= data_->data.series_count()) {
    throw bad_window("series " + std::to_string(s) + " is out of range (dataset has " +
                     std::to_string(data_->data.series_count()) + ")");
  }
  if (t < static_cast<long long>(tw) - 1 || t >= static_cast<long long>(data_->data.steps)) {
    throw bad_window("window end t=" + std::to_string(t) + " must lie in [" + std::to_string(tw - 1) + ", " +
                     std::to_string(data_->data.steps - 1) + "]");
  }
  r.target.bundle = &*data_;
  r.ref = {static_cast<std::size_t>(s), static_cast<std::size_t>(t) + 1 - tw};
  return r;
}

ApiResponse Service::health() const {
  return {200, json{{"status", "ok"}, {"model_loaded", model_loaded()}}.dump()};
}

ApiResponse Service::model_info() const {
  return guarded([&] {
    if (!checkpoint_) throw not_trained("no model is loaded");
    return ApiResponse{200, model_json_};
  });
}

ApiResponse Service::forecast(const std::string& body) const {
  return guarded([&] {
    const Resolved r = resolve(body, nullptr);
    const auto f = train::forecast_window(checkpoint_->model, r.target, r.ref);
    json out{{"horizon", f.horizon}, {"values", f.values}, {"anomaly_probs", f.anomaly_probs}, {"window_end_t", f.window_end}};
    return ApiResponse{200, out.dump()};
  });
}

ApiResponse Service::intervene(const std::string& body) const {
  return guarded([&] {
    const json j = parse_body(body);
    if (!j.contains("spec")) throw schema_error("request needs an intervention 'spec'");
    const auto spec = causal::InterventionSpec::from_json(j.at("spec").dump());
    const auto& cols = checkpoint_ ? checkpoint_->normalization.columns : std::vector<std::size_t>{};
    if (checkpoint_ && std::find(cols.begin(), cols.end(), synth::feature_index(spec.treatment)) == cols.end()) {
      throw schema_error("treatment '" + spec.treatment + "' is not a model input");
    }
    json rest = j;
    rest.erase("spec");
    const Resolved r = resolve(rest.dump(), nullptr);
    const auto cf = train::counterfactual_predict(train::model_predictor(checkpoint_->model), r.target, r.ref, spec);
    json out{{"trajectory_a0", cf.trajectory_a0},
             {"trajectory_a1", cf.trajectory_a1},
             {"ace_rollout", cf.ace_rollout},
             {"per_step_delta", cf.per_step_delta},
             {"window_end_t", r.ref.start + r.target.window - 1}};
    return ApiResponse{200, out.dump()};
  });
}

ApiResponse Service::explain(const std::map<std::string, std::string>& query) const {
  return guarded([&] {
    const Resolved r = resolve({}, &query);
    const auto ex = train::explain_window(checkpoint_->model, r.target, r.ref);
    json heads = json::array();
    for (const auto& m : ex.temporal_attention) heads.push_back(matrix_json(m));
    json infl = json::array();
    for (const auto& i : ex.top_influencers) infl.push_back({{"node_id", i.node_id}, {"score", i.score}});
    json out{{"temporal_attention", heads},
             {"top_influencers", infl},
             {"attention_row_sums", ex.attention_row_sums},
             {"window_end_t", r.ref.start + r.target.window - 1}};
    return ApiResponse{200, out.dump()};
  });
}

ApiResponse Service::handle(const std::string& method, const std::string& path, const std::string& body,
                            const std::map<std::string, std::string>& query) const {
  if (path == "/health" && method == "GET") return health();
  if (path == "/v1/model" && method == "GET") return model_info();
  if (path == "/v1/forecast" && method == "POST") return forecast(body);
  if (path == "/v1/intervene" && method == "POST") return intervene(body);
  if (path == "/v1/explain" && method == "GET") return explain(query);
  return {404, error_body("schema_error", "no endpoint " + method + " " + path)};
}

HttpServer::HttpServer(const Service& service) : server_(std::make_unique<httplib::Server>()) {
  auto& server = *server_;
  auto bind_route = [&](const char* method, const char* path) {
    auto handler = [&service, method, path](const httplib::Request& req, httplib::Response& res) {
      std::map<std::string, std::string> query;
      for (const auto& [k, v] : req.params) query.emplace(k, v);
      const ApiResponse r = service.handle(method, path, req.body, query);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    if (std::string(method) == "GET") server.Get(path, handler);
    else server.Post(path, handler);
  };
  bind_route("GET", "/health");
  bind_route("GET", "/v1/model");
  bind_route("POST", "/v1/forecast");
  bind_route("POST", "/v1/intervene");
  bind_route("GET", "/v1/explain");
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(error_body("schema_error", "no endpoint " + req.method + " " + req.path), "application/json");
    }
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    res.status = 500;
    res.set_content(error_body("internal", "unhandled server error"), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

void serve(const Service& service, const std::string& host, int port) {
  HttpServer server(service);
  server.bind(host, port);
  server.listen();
}

}  // namespace dss::service
