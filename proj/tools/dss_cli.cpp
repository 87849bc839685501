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

// dss: generate / train / evaluate / compare / intervene / serve.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dss/service/api.hpp"
#include "dss/service/config_file.hpp"
#include "dss/synth/generator.hpp"
#include "dss/train/evaluate.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace dss;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Thrown for errors that should exit 2 without an error document (already printed).
struct UsageExit {
  int code;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw synth::ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct RunFlags {
  std::string config_path;
  bool full_scale = false;
  std::optional<std::size_t> epochs, batch, seed;
  std::optional<double> lr;
};

service::RunConfig run_config(const RunFlags& f) {
  service::RunConfig base = f.full_scale ? service::RunConfig{} : service::desk_scale_config();
  if (!f.config_path.empty()) base = service::load_run_config(f.config_path, base);
  if (f.epochs) base.train.epochs = *f.epochs;
  if (f.batch) base.train.batch_size = *f.batch;
  if (f.seed) base.train.seed = *f.seed;
  if (f.lr) base.train.learning_rate = *f.lr;
  base.train.validate();
  base.model.validate();
  base.loss.validate();
  return base;
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value run config file")->check(CLI::ExistingFile);
  cmd->add_flag("--full-scale", f.full_scale, "use full-width model defaults instead of the desk preset");
}

// Uses --data when given, otherwise regenerates the training dataset from the
// checkpoint's generator echo if its fingerprint still matches.
std::optional<synth::Bundle> dataset_for(const service::ModelCheckpoint& ckpt, const std::string& data_dir) {
  if (!data_dir.empty()) return synth::import_dataset(data_dir);
  if (ckpt.data_config_json.empty()) return std::nullopt;
  auto b = synth::generate(synth::GeneratorConfig::from_json(ckpt.data_config_json));
  if (synth::dataset_fingerprint(b.data) != ckpt.metadata.dataset_fingerprint) {
    std::cerr << "note: regenerated data does not match the checkpoint fingerprint; pass --data\n";
    return std::nullopt;
  }
  return b;
}

int run_generate(const RunFlags& f, const std::string& out, std::optional<std::uint64_t> seed) {
  auto cfg = run_config(f);
  if (seed) cfg.data.seed = *seed;
  const auto bundle = synth::generate(cfg.data);
  synth::export_dataset(bundle, out);
  std::cout << json{{"out", out},
                    {"series", bundle.data.series_count()},
                    {"steps", bundle.data.steps},
                    {"nodes", bundle.graph.node_count()},
                    {"fingerprint", synth::dataset_fingerprint(bundle.data)}}
                   .dump()
            << '\n';
  return 0;
}

int run_train(const RunFlags& f, const std::string& data, const std::string& out, const std::string& curve_path,
              bool quiet) {
  const auto cfg = run_config(f);
  const auto bundle = synth::import_dataset(data);
  const auto result = train::train(cfg.model, bundle, cfg.train, cfg.loss, [&](const train::EpochRecord& e) {
    if (!quiet) std::cerr << "epoch " << e.epoch << " train " << e.train_loss << " val " << e.validation_loss << '\n';
  });
  const auto ckpt = service::make_checkpoint(result, bundle, cfg.train, cfg.loss);
  service::save_checkpoint(ckpt, out);
  if (!curve_path.empty()) write_file(curve_path, train::curve_csv(result.curve));
  std::cout << json{{"checkpoint", out},
                    {"epochs_run", result.epochs_run},
                    {"best_epoch", result.best_epoch},
                    {"best_validation_loss", result.best_validation_loss},
                    {"optimizer_steps", result.optimizer_steps},
                    {"stopped_early", result.stopped_early},
                    {"seconds", result.seconds}}
                   .dump()
            << '\n';
  return 0;
}

int run_evaluate(const RunFlags& f, const std::string& ckpt_path, const std::string& data, const std::string& report,
                 const std::string& baseline) {
  const auto bundle = synth::import_dataset(data);
  train::EvalReport rep;
  if (baseline.empty()) {
    if (ckpt_path.empty()) throw service::not_trained("evaluate needs --ckpt (or --baseline)");
    const auto ckpt = service::load_checkpoint(ckpt_path);
    const auto target = train::test_target(bundle, ckpt.normalization, ckpt.model_config(), ckpt.train_config);
    rep = train::evaluate(train::to_string(ckpt.model_config().family), train::model_predictor(ckpt.model), target);
    rep.curve = ckpt.metadata.curve;
  } else {
    const auto cfg = run_config(f);
    train::BaselineConfig bc;
    bc.train = cfg.train;
    bc.loss = cfg.loss;
    bc.gru = cfg.model;
    rep = train::run_baseline(train::parse_baseline_kind(baseline), bundle, bc);
  }
  const std::string text = rep.to_json();
  if (!report.empty()) write_file(report, text + "\n");
  std::cout << text << '\n';
  return 0;
}

int run_compare(const std::vector<std::string>& paths, const std::string& out) {
  std::vector<train::EvalReport> reports;
  for (const auto& p : paths) reports.push_back(train::EvalReport::from_json(read_file(p)));
  const auto ranked = train::compare(std::move(reports));
  std::cout << train::comparison_table(ranked);
  if (!out.empty()) {
    json j = json::array();
    for (const auto& r : ranked) j.push_back(json::parse(r.to_json()));
    write_file(out, j.dump(2) + "\n");
  }
  return 0;
}

int run_intervene(const std::string& ckpt_path, const std::string& spec_path, const std::string& data,
                  std::optional<long long> series, std::optional<long long> t) {
  auto ckpt = service::load_checkpoint(ckpt_path);
  json body = json::parse(read_file(spec_path));
  if (!body.contains("spec")) body = json{{"spec", body}};
  auto bundle = dataset_for(ckpt, data);
  if (bundle) {
    if (series) body["series"] = *series;
    if (t) body["t"] = *t;
    if (!body.contains("series")) body["series"] = 0;
    if (!body.contains("t")) body["t"] = static_cast<long long>(bundle->data.steps) - 1;
  }
  const service::Service svc(std::move(ckpt), std::move(bundle));
  const auto r = svc.intervene(body.dump());
  if (r.status != 200) {
    std::cerr << r.body << '\n';
    return json::parse(r.body).at("error").at("code") == "schema_error" ? kExitUsage : kExitFailure;
  }
  std::cout << r.body << '\n';
  return 0;
}

int run_serve(const std::string& ckpt_path, const std::string& data, const std::string& host, int port) {
  std::optional<service::ModelCheckpoint> ckpt;
  std::optional<synth::Bundle> bundle;
  if (!ckpt_path.empty()) {
    ckpt = service::load_checkpoint(ckpt_path);
    bundle = dataset_for(*ckpt, data);
  } else if (!data.empty()) {
    bundle = synth::import_dataset(data);
  }
  const service::Service svc(std::move(ckpt), std::move(bundle));
  service::HttpServer server(svc);
  const int bound = server.bind(host, port);
  std::cerr << "listening on " << host << ':' << bound << (svc.model_loaded() ? "" : " (no model loaded)") << '\n';
  server.listen();
  return 0;
}

int port_default() {
  if (const char* env = std::getenv("DSS_PORT")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw synth::ConfigError(std::string("DSS_PORT is not a port number: ") + env);
    }
  }
  return 8080;
}

int fail(const std::string& code, const std::string& message, int exit_code) {
  std::cerr << service::error_body(code, message) << '\n';
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dss: diffusion-aware forecasting and what-if analysis"};
  app.require_subcommand(1);

  RunFlags flags;
  std::string out, data, ckpt, report, baseline, curve, spec, host = "127.0.0.1", compare_out;
  std::vector<std::string> reports;
  std::optional<std::uint64_t> data_seed;
  std::optional<long long> series, t;
  int port = 0;
  bool quiet = false;

  auto* gen = app.add_subcommand("generate", "write a synthetic dataset directory");
  add_run_flags(gen, flags);
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--seed", data_seed, "generator seed override");

  auto* tr = app.add_subcommand("train", "train a model and write a checkpoint");
  add_run_flags(tr, flags);
  tr->add_option("--data", data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--out", out, "checkpoint path")->required();
  tr->add_option("--epochs", flags.epochs, "epochs (>= 1)");
  tr->add_option("--lr", flags.lr, "learning rate");
  tr->add_option("--batch", flags.batch, "batch size");
  tr->add_option("--seed", flags.seed, "training seed");
  tr->add_option("--curve", curve, "write the loss curve CSV here");
  tr->add_flag("--quiet", quiet, "no per-epoch log");

  auto* ev = app.add_subcommand("evaluate", "score a checkpoint or a baseline on the test split");
  add_run_flags(ev, flags);
  ev->add_option("--ckpt", ckpt, "checkpoint path");
  ev->add_option("--data", data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--report", report, "write the report JSON here");
  ev->add_option("--baseline", baseline, "persistence or gru instead of a checkpoint");

  auto* cmp = app.add_subcommand("compare", "rank evaluation reports");
  cmp->add_option("--reports", reports, "report JSON files")->required()->expected(1, -1);
  cmp->add_option("--out", compare_out, "write the ranked reports here");

  auto* iv = app.add_subcommand("intervene", "what-if rollout for one window");
  iv->add_option("--ckpt", ckpt, "checkpoint path")->required();
  iv->add_option("--spec", spec, "intervention spec JSON")->required()->check(CLI::ExistingFile);
  iv->add_option("--data", data, "dataset directory (default: regenerate from the checkpoint)");
  iv->add_option("--series", series, "series index");
  iv->add_option("--t", t, "window end step");

  auto* sv = app.add_subcommand("serve", "HTTP service");
  sv->add_option("--ckpt", ckpt, "checkpoint path");
  sv->add_option("--data", data, "dataset directory (default: regenerate from the checkpoint)");
  sv->add_option("--host", host, "bind address");
  sv->add_option("--port", port, "port (default $DSS_PORT or 8080)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*gen) return run_generate(flags, out, data_seed);
    if (*tr) return run_train(flags, data, out, curve, quiet);
    if (*ev) return run_evaluate(flags, ckpt, data, report, baseline);
    if (*cmp) return run_compare(reports, compare_out);
    if (*iv) return run_intervene(ckpt, spec, data, series, t);
    if (*sv) return run_serve(ckpt, data, host, sv->count("--port") ? port : port_default());
  } catch (const service::CheckpointMissing& e) {
    return fail("not_trained", e.what(), kExitFailure);
  } catch (const service::ApiError& e) {
    return fail(e.code(), e.what(), kExitFailure);
  } catch (const synth::ConfigError& e) {
    return fail("schema_error", e.what(), kExitUsage);
  } catch (const causal::SpecError& e) {
    return fail("schema_error", e.what(), kExitUsage);
  } catch (const synth::SchemaError& e) {
    return fail("schema_error", e.what(), kExitUsage);
  } catch (const train::ComparabilityError& e) {
    return fail("schema_error", e.what(), kExitFailure);
  } catch (const json::exception& e) {
    return fail("schema_error", e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kExitFailure);
  }
  return kExitFailure;
}
