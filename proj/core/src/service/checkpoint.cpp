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

#include "dss/service/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dss::service {

namespace {

using json = nlohmann::json;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

json metadata_json(const TrainingMetadata& m) {
  json curve = json::array();
  for (const auto& r : m.curve) curve.push_back({r.epoch, r.train_loss, r.validation_loss});
  return {{"seed", m.seed},
          {"epochs_run", m.epochs_run},
          {"best_epoch", m.best_epoch},
          {"best_val_loss", m.best_validation_loss},
          {"train_seconds", m.seconds},
          {"dataset_fingerprint", m.dataset_fingerprint},
          {"loss_curve", curve}};
}

json header_json(const ModelCheckpoint& c) {
  json ranges = json::array();
  for (const auto& r : c.feature_ranges) ranges.push_back({{"column", r.column}, {"min", r.min}, {"max", r.max}});
  json j;
  j["format_version"] = kCheckpointVersion;
  j["model_config"] = json::parse(c.model_config().to_json());
  j["train_config"] = json::parse(c.train_config.to_json());
  j["loss_config"] = {{"lambda1", c.loss_config.forecast_weight},
                      {"lambda2", c.loss_config.anomaly_weight},
                      {"anomaly_class_weight", c.loss_config.positive_class_weight}};
  j["data_config"] = c.data_config_json.empty() ? json(nullptr) : json::parse(c.data_config_json);
  j["metadata"] = metadata_json(c.metadata);
  j["normalization"] = json::parse(c.normalization.to_json());
  j["feature_ranges"] = ranges;
  std::vector<std::string> exo;
  for (std::size_t col : c.normalization.columns) exo.push_back(synth::feature_schema()[col].name);
  j["exogenous_columns"] = exo;
  return j;
}

}  // namespace

ModelCheckpoint make_checkpoint(const train::TrainResult& result, const synth::Bundle& bundle,
                                const train::TrainConfig& config, const train::LossConfig& loss) {
  ModelCheckpoint c;
  c.model = result.model;
  c.normalization = result.normalization;
  c.feature_ranges = train::feature_ranges(bundle.data);
  c.train_config = config;
  c.loss_config = loss;
  c.data_config_json = bundle.config_json;
  c.metadata.seed = config.seed;
  c.metadata.epochs_run = result.epochs_run;
  c.metadata.best_epoch = result.best_epoch;
  c.metadata.best_validation_loss = result.best_validation_loss;
  c.metadata.seconds = result.seconds;
  c.metadata.dataset_fingerprint = synth::dataset_fingerprint(bundle.data);
  c.metadata.curve = result.curve;
  return c;
}

std::string checkpoint_summary_json(const ModelCheckpoint& ckpt) { return header_json(ckpt).dump(); }

std::string serialize_checkpoint(const ModelCheckpoint& ckpt) {
  json header = header_json(ckpt);
  json directory = json::array();
  std::size_t offset = 0;
  const auto params = ckpt.model.parameters();
  for (const auto& [name, v] : params.entries()) {
    directory.push_back({{"name", name}, {"shape", v.shape()}, {"offset", offset}});
    offset += v.size();
  }
  header["tensors"] = directory;
  header["payload_floats"] = offset;
  const std::string text = header.dump();

  std::string out(kCheckpointMagic, 4);
  put_u64(out, text.size());
  out += text;
  out.reserve(out.size() + 4 * offset);
  for (const auto& [name, v] : params.entries()) {
    for (double x : v.value().data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  }
  return out;
}

ModelCheckpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError("not a checkpoint (bad magic bytes)");
  }
  const std::uint64_t len = get_u64(bytes, 4);
  if (len > bytes.size() - 12) throw CheckpointError("checkpoint header is truncated");
  json h;
  try {
    h = json::parse(bytes.substr(12, len));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  ModelCheckpoint c;
  try {
    const int version = h.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("checkpoint format version " + std::to_string(version) + " is not supported");
    }
    const auto mc = train::ModelConfig::from_json(h.at("model_config").dump());
    c.train_config = train::TrainConfig::from_json(h.at("train_config").dump());
    const json& lc = h.at("loss_config");
    c.loss_config.forecast_weight = lc.at("lambda1").get<double>();
    c.loss_config.anomaly_weight = lc.at("lambda2").get<double>();
    c.loss_config.positive_class_weight = lc.at("anomaly_class_weight").get<double>();
    if (!h.at("data_config").is_null()) c.data_config_json = h.at("data_config").dump();
    const json& m = h.at("metadata");
    c.metadata.seed = m.at("seed").get<std::uint64_t>();
    c.metadata.epochs_run = m.at("epochs_run").get<std::size_t>();
    c.metadata.best_epoch = m.at("best_epoch").get<std::size_t>();
    c.metadata.best_validation_loss = m.at("best_val_loss").get<double>();
    c.metadata.seconds = m.at("train_seconds").get<double>();
    c.metadata.dataset_fingerprint = m.at("dataset_fingerprint").get<std::string>();
    for (const auto& r : m.at("loss_curve")) {
      c.metadata.curve.push_back({r.at(0).get<std::size_t>(), r.at(1).get<double>(), r.at(2).get<double>()});
    }
    c.normalization = train::Normalization::from_json(h.at("normalization").dump());
    for (const auto& r : h.at("feature_ranges")) {
      c.feature_ranges.push_back({r.at("column").get<std::string>(), r.at("min").get<double>(), r.at("max").get<double>()});
    }

    c.model = train::Model::init(mc, 0);
    const auto params = c.model.parameters();
    const std::size_t floats = h.at("payload_floats").get<std::size_t>();
    if (bytes.size() - 12 - len != 4 * floats) {
      throw CheckpointError("checkpoint payload has " + std::to_string(bytes.size() - 12 - len) + " bytes, expected " +
                            std::to_string(4 * floats));
    }
    std::set<std::string> seen;
    for (const auto& t : h.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      if (!seen.insert(name).second) throw CheckpointError("tensor '" + name + "' appears twice");
      if (!params.contains(name)) throw CheckpointError("checkpoint tensor '" + name + "' is not a model parameter");
      num::Var v = params.at(name);
      const auto shape = t.at("shape").get<num::Shape>();
      if (shape != v.shape()) {
        throw CheckpointError("tensor '" + name + "' has shape " + num::shape_string(shape) + ", model expects " +
                              num::shape_string(v.shape()));
      }
      const std::size_t offset = t.at("offset").get<std::size_t>();
      const std::size_t count = num::numel(shape);
      if (offset + count > floats) throw CheckpointError("tensor '" + name + "' runs past the payload");
      num::Tensor value(shape);
      for (std::size_t i = 0; i < count; ++i) {
        value[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, 12 + len + 4 * (offset + i))));
      }
      v.assign(std::move(value));
    }
    if (seen.size() != params.size()) {
      throw CheckpointError("checkpoint has " + std::to_string(seen.size()) + " tensors, model needs " +
                            std::to_string(params.size()));
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint header: ") + e.what());
  } catch (const synth::ConfigError& e) {
    throw CheckpointError(std::string("checkpoint config: ") + e.what());
  }
  return c;
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw CheckpointMissing("no checkpoint at " + path.string() + "; run train first");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace dss::service
