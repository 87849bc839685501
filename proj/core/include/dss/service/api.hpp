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

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "dss/service/checkpoint.hpp"

namespace httplib {
class Server;
}

namespace dss::service {

/// Machine-readable failure. `code` is one of schema_error, not_trained,
/// bad_window, internal.
class ApiError : public std::runtime_error {
 public:
  ApiError(std::string code, const std::string& message, int status);
  const std::string& code() const { return code_; }
  int status() const { return status_; }

 private:
  std::string code_;
  int status_;
};

ApiError schema_error(const std::string& message);
ApiError bad_window(const std::string& message);
ApiError not_trained(const std::string& message);

/// {"error": {"code": ..., "message": ...}}
std::string error_body(const std::string& code, const std::string& message);

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// Request handlers over an immutable checkpoint and optional dataset.
/// Every method is const and safe to call concurrently.
class Service {
 public:
  Service(std::optional<ModelCheckpoint> checkpoint, std::optional<synth::Bundle> data);

  bool model_loaded() const { return checkpoint_.has_value(); }

  ApiResponse health() const;
  ApiResponse model_info() const;
  /// {"series": s, "t": t} or {"window": [[x_1..x_m] per step], "sentiment"?: [..], "active"?: [[node ids]]}
  ApiResponse forecast(const std::string& body) const;
  /// {"spec": InterventionSpec, "series": s, "t": t} (or a raw "window")
  ApiResponse intervene(const std::string& body) const;
  /// Query parameters series and t.
  ApiResponse explain(const std::map<std::string, std::string>& query) const;

  /// Routes a request; unknown paths become schema_error 404.
  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body,
                     const std::map<std::string, std::string>& query = {}) const;

 private:
  struct Resolved;
  Resolved resolve(const std::string& body_or_empty, const std::map<std::string, std::string>* query) const;
  template <typename F>
  ApiResponse guarded(F&& f) const;

  std::optional<ModelCheckpoint> checkpoint_;
  std::optional<synth::Bundle> data_;
  std::string model_json_;
};

/// HTTP/1.1 front end over a Service. The Service must outlive the server.
class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void listen();
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
};

/// Bind and serve until the process ends.
void serve(const Service& service, const std::string& host, int port);

}  // namespace dss::service
