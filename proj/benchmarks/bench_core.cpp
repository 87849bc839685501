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

#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

#include "dss/causal/causal.hpp"
#include "dss/numerics/ops.hpp"
#include "dss/service/checkpoint.hpp"
#include "dss/service/config_file.hpp"
#include "dss/synth/generator.hpp"
#include "dss/train/trainer.hpp"

using namespace dss;
using num::Tensor;
using num::Var;

namespace {

// Shared fixture data; built once.
const synth::Bundle& bundle() {
  static const synth::Bundle b = [] {
    synth::GeneratorConfig gc;
    gc.series = 64;
    gc.steps = 80;
    return synth::generate(gc);
  }();
  return b;
}

train::ModelConfig desk_model() { return service::desk_scale_config().model; }

train::Batch make(std::size_t batch_size, const train::ModelConfig& mc) {
  const auto& b = bundle();
  static const auto norm = train::fit_normalization(b.data, 60);
  std::vector<train::WindowRef> refs;
  for (std::size_t i = 0; i < batch_size; ++i) refs.push_back({i % b.data.series_count(), (i * 7) % 40});
  return train::make_batch(train::source_of(b), norm, refs, mc.window, mc.horizon, true, mc.gnn.neighbor_mode);
}

}  // namespace

static void BM_EdgeAggregate(benchmark::State& state) {
  const std::size_t n = 200, d = 16, e = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  std::vector<std::size_t> recv(e), send(e);
  for (std::size_t i = 0; i < e; ++i) recv[i] = node(rng), send[i] = node(rng);
  std::sort(recv.begin(), recv.end());
  const auto r = num::make_index(recv), s = num::make_index(send);
  Var w = Var::constant(Tensor::uniform({e}, rng, 0.0, 1.0));
  Var x = Var::constant(Tensor::randn({n, d}, rng));
  for (auto _ : state) benchmark::DoNotOptimize(num::edge_aggregate(w, x, r, s, n).value().data().data());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * e));
}
BENCHMARK(BM_EdgeAggregate)->Arg(800)->Arg(8000);

static void BM_ModelForward(benchmark::State& state) {
  const auto mc = desk_model();
  const auto model = train::Model::init(mc, 1);
  const auto batch = make(static_cast<std::size_t>(state.range(0)), mc);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(batch).forecast.value().data().data());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * state.range(0)));
}
BENCHMARK(BM_ModelForward)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_TrainStep(benchmark::State& state) {
  const auto mc = desk_model();
  auto model = train::Model::init(mc, 1);
  const auto batch = make(static_cast<std::size_t>(state.range(0)), mc);
  num::OptimizerConfig oc;
  oc.learning_rate = 1e-3;
  num::Optimizer opt(oc, model.parameters().vars());
  const train::LossConfig loss;
  for (auto _ : state) {
    auto out = model.forward(batch);
    opt.step(num::backward(train::composite_loss(out.forecast, batch.targets, out.anomaly_prob, batch.labels, loss)));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * state.range(0)));
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_CheckpointRoundTrip(benchmark::State& state) {
  const auto mc = desk_model();
  service::ModelCheckpoint ckpt;
  ckpt.model = train::Model::init(mc, 1);
  ckpt.normalization = train::fit_normalization(bundle().data, 60);
  std::size_t size = 0;
  for (auto _ : state) {
    const std::string bytes = service::serialize_checkpoint(ckpt);
    benchmark::DoNotOptimize(service::deserialize_checkpoint(bytes).model.config().window);
    size = bytes.size();
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * size));
}
BENCHMARK(BM_CheckpointRoundTrip)->Unit(benchmark::kMillisecond);

static void BM_PropensityFit(benchmark::State& state) {
  const auto samples = causal::binarize_treatment(bundle().data, causal::InterventionSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(causal::fit_propensity(samples).coefficients.data());
}
BENCHMARK(BM_PropensityFit)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
