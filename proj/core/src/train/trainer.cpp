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

#include "dss/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dss/numerics/ops.hpp"

namespace dss::train {

using num::Tensor;
using num::Var;

namespace {
using json = nlohmann::json;
}

void LossConfig::validate() const {
  if (!(forecast_weight >= 0.0) || !(anomaly_weight >= 0.0)) throw synth::ConfigError("loss weights must be >= 0");
  if (forecast_weight == 0.0 && anomaly_weight == 0.0) throw synth::ConfigError("loss weights cannot both be zero");
  if (!(positive_class_weight > 0.0)) throw synth::ConfigError("anomaly class weight must be > 0");
}

Var composite_loss(const Var& forecast, const Tensor& targets, const Var& anomaly_prob, const Tensor& labels,
                   const LossConfig& config) {
  if (forecast.shape() != targets.shape()) {
    throw num::DimensionError("forecast " + num::shape_string(forecast.shape()) + " vs targets " +
                              num::shape_string(targets.shape()));
  }
  if (anomaly_prob.shape() != labels.shape()) {
    throw num::DimensionError("anomaly probabilities " + num::shape_string(anomaly_prob.shape()) + " vs labels " +
                              num::shape_string(labels.shape()));
  }
  Var mse = num::mean_all(num::square(forecast - Var::constant(targets)));
  Var total = num::scale(mse, config.forecast_weight);
  if (config.anomaly_weight == 0.0) return total;

  Tensor pos = labels, neg = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    pos[i] = config.positive_class_weight * labels[i];
    neg[i] = 1.0 - labels[i];
  }
  Var p = num::clamp(anomaly_prob, 1e-12, 1.0 - 1e-12);
  Var ll = Var::constant(pos) * num::log(p) + Var::constant(neg) * num::log(num::add_scalar(num::scale(p, -1.0), 1.0));
  Var bce = num::scale(num::mean_all(ll), -1.0);
  return total + num::scale(bce, config.anomaly_weight);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw synth::ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw synth::ConfigError("batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw synth::ConfigError("learning rate must be > 0");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw synth::ConfigError("validation fraction must be in (0, 1)");
  }
  if (!(test_fraction >= 0.0) || validation_fraction + test_fraction >= 1.0) {
    throw synth::ConfigError("validation + test fractions must be < 1");
  }
  if (weight_decay < 0.0) throw synth::ConfigError("weight decay must be >= 0");
  if (train_stride == 0 || eval_stride == 0) throw synth::ConfigError("strides must be >= 1");
}

std::string TrainConfig::to_json() const {
  return json{{"epochs", epochs},
              {"batch_size", batch_size},
              {"learning_rate", learning_rate},
              {"optimizer", num::to_string(optimizer)},
              {"weight_decay", weight_decay},
              {"patience", patience},
              {"validation_fraction", validation_fraction},
              {"test_fraction", test_fraction},
              {"seed", seed},
              {"train_stride", train_stride},
              {"eval_stride", eval_stride},
              {"jitter_train_windows", jitter_train_windows}}
      .dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  TrainConfig c;
  try {
    const json j = json::parse(text);
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.optimizer = num::parse_optimizer_kind(j.at("optimizer").get<std::string>());
    c.weight_decay = j.at("weight_decay").get<double>();
    c.patience = j.at("patience").get<std::size_t>();
    c.validation_fraction = j.at("validation_fraction").get<double>();
    c.test_fraction = j.at("test_fraction").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.train_stride = j.at("train_stride").get<std::size_t>();
    c.eval_stride = j.at("eval_stride").get<std::size_t>();
    c.jitter_train_windows = j.value("jitter_train_windows", true);
  } catch (const json::exception& e) {
    throw synth::ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

double dataset_loss(const Model& model, const BatchSource& source, const Normalization& norm,
                    std::span<const WindowRef> refs, const LossConfig& loss, std::size_t batch_size) {
  if (refs.empty()) throw std::invalid_argument("no windows to score");
  const auto& mc = model.config();
  double total = 0.0;
  for (std::size_t i = 0; i < refs.size(); i += batch_size) {
    const auto chunk = refs.subspan(i, std::min(batch_size, refs.size() - i));
    Batch b = make_batch(source, norm, chunk, mc.window, mc.horizon, model.uses_graph(), mc.gnn.neighbor_mode);
    auto out = model.forward(b);
    total += composite_loss(out.forecast, b.targets, out.anomaly_prob, b.labels, loss).value().item() *
             static_cast<double>(chunk.size());
  }
  return total / static_cast<double>(refs.size());
}

TrainResult train(const ModelConfig& model_config, const synth::Bundle& bundle, const TrainConfig& config,
                  const LossConfig& loss, const EpochCallback& on_epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();
  loss.validate();
  model_config.validate();
  bundle.data.validate();

  TrainResult res;
  res.splits = plan_splits(bundle.data.series_count(), bundle.data.steps, model_config.window, model_config.horizon,
                           config.validation_fraction, config.test_fraction, config.train_stride, config.eval_stride);
  if (res.splits.train.empty() || res.splits.validation.empty()) {
    throw synth::ConfigError("dataset too short for the window: training or validation split is empty");
  }
  res.normalization = fit_normalization(bundle.data, res.splits.train_end);
  res.model = Model::init(model_config, config.seed);
  const BatchSource source = source_of(bundle);

  num::OptimizerConfig oc;
  oc.kind = config.optimizer;
  oc.learning_rate = config.learning_rate;
  oc.weight_decay = config.weight_decay;
  num::Optimizer opt(oc, res.model.parameters().vars());

  std::mt19937_64 shuffle_rng(config.seed ^ 0x5eedf00dULL);
  std::vector<WindowRef> order = res.splits.train;
  std::vector<Tensor> best;
  res.best_validation_loss = INFINITY;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.jitter_train_windows && config.train_stride > 1) {
      order.clear();
      const std::size_t max_start = res.splits.train_end - model_config.window - model_config.horizon;
      for (std::size_t s = 0; s < bundle.data.series_count(); ++s) {
        const std::size_t phase = shuffle_rng() % std::min(config.train_stride, max_start + 1);
        for (std::size_t start = phase; start <= max_start; start += config.train_stride) order.push_back({s, start});
      }
    }
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::size_t batches = (order.size() + config.batch_size - 1) / config.batch_size;
    if (config.max_batches_per_epoch > 0) batches = std::min(batches, config.max_batches_per_epoch);
    double sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t bi = 0; bi < batches; ++bi) {
      const std::size_t lo = bi * config.batch_size;
      const std::span<const WindowRef> chunk(order.data() + lo, std::min(config.batch_size, order.size() - lo));
      Batch b = make_batch(source, res.normalization, chunk, model_config.window, model_config.horizon,
                           res.model.uses_graph(), model_config.gnn.neighbor_mode);
      auto out = res.model.forward(b);
      Var l = composite_loss(out.forecast, b.targets, out.anomaly_prob, b.labels, loss);
      const double value = l.value().item();
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << ", batch " << bi + 1 << ": loss " << value
            << " (learning rate " << config.learning_rate << ")";
        throw TrainingDiverged(msg.str());
      }
      opt.step(num::backward(l));
      sum += value * static_cast<double>(chunk.size());
      seen += chunk.size();
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = sum / static_cast<double>(seen);
    rec.validation_loss = dataset_loss(res.model, source, res.normalization, res.splits.validation, loss,
                                       config.batch_size);
    if (!std::isfinite(rec.validation_loss)) {
      throw TrainingDiverged("validation loss is not finite at epoch " + std::to_string(epoch));
    }
    res.curve.push_back(rec);
    res.epochs_run = epoch;
    if (on_epoch) on_epoch(rec);
    if (rec.validation_loss < res.best_validation_loss) {
      res.best_validation_loss = rec.validation_loss;
      res.best_epoch = epoch;
      best = res.model.snapshot();
      since_best = 0;
    } else if (++since_best >= config.patience && config.patience > 0) {
      res.stopped_early = epoch < config.epochs;
      break;
    }
  }
  res.model.restore(best);
  res.model.quantize_to_float();
  res.optimizer_steps = opt.step_count();
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::string curve_csv(const std::vector<EpochRecord>& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,val_loss\n";
  for (const auto& r : curve) out << r.epoch << ',' << r.train_loss << ',' << r.validation_loss << '\n';
  return out.str();
}

}  // namespace dss::train
