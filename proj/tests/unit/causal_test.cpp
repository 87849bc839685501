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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dss/causal/causal.hpp"
#include "dss/synth/generator.hpp"

using namespace dss;
using causal::InterventionSpec;
using causal::LabeledSamples;

namespace {

InterventionSpec binary_spec() {
  InterventionSpec s;
  s.treatment = "spend";
  s.a0 = 0.0;
  s.a1 = 1.0;
  s.covariates = {"sentiment"};
  return s;
}

LabeledSamples samples_from(const std::vector<int>& arm, const std::vector<double>& y,
                            const std::vector<double>& x = {}) {
  std::vector<double> levels(arm.begin(), arm.end());
  std::vector<std::vector<double>> cov;
  for (double v : x) cov.push_back({v});
  return causal::label_samples(levels, y, cov, binary_spec());
}

causal::PropensityModel constant_model(double p) {
  causal::PropensityModel m;
  m.coefficients = {std::log(p / (1 - p))};
  return m;
}

}  // namespace

TEST(InterventionSpec, Validation) {
  InterventionSpec s = binary_spec();
  EXPECT_NO_THROW(s.validate());
  s.a1 = 0.0;
  EXPECT_THROW(s.validate(), causal::SpecError);
  s = binary_spec();
  s.treatment = "budget";
  EXPECT_THROW(s.validate(), causal::SpecError);
  s = binary_spec();
  s.treatment = "dwell_time";  // consumer column, not an intervention lever
  EXPECT_THROW(s.validate(), causal::SpecError);
  s = binary_spec();
  s.covariates = {"nope"};
  EXPECT_THROW(s.validate(), causal::SpecError);
}

TEST(InterventionSpec, JsonRoundTrip) {
  auto s = InterventionSpec::from_json(R"({"treatment":"spend","a0":0.25,"a1":2,"covariates":["sentiment","ctr"]})");
  EXPECT_EQ(s.a0, 0.25);
  EXPECT_EQ(s.a1, 2.0);
  EXPECT_EQ(s.covariates.size(), 2u);
  EXPECT_EQ(InterventionSpec::from_json(s.to_json()).to_json(), s.to_json());
  EXPECT_THROW(InterventionSpec::from_json(R"({"treatment":"spend","a0":1,"a1":1})"), causal::SpecError);
  EXPECT_THROW(InterventionSpec::from_json("not json"), causal::SpecError);
  EXPECT_THROW(InterventionSpec::from_json(R"({"a0":1,"a1":2})"), causal::SpecError);
}

TEST(BinarizeTreatment, BinaryLevelsArePreserved) {
  auto s = samples_from({0, 1, 1, 0, 1}, {1, 2, 3, 4, 5});
  const int expected[] = {0, 1, 1, 0, 1};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(s.samples[i].treated, expected[i] == 1);
  EXPECT_EQ(s.treated_count, 3u);
  EXPECT_EQ(s.control_count, 2u);
}

TEST(BinarizeTreatment, TieGoesToControl) {
  EXPECT_FALSE(causal::nearest_level_treated(0.5, 0.0, 1.0));
  EXPECT_TRUE(causal::nearest_level_treated(0.5000001, 0.0, 1.0));
  EXPECT_FALSE(causal::nearest_level_treated(1.5, 1.0, 2.0));
}

TEST(BinarizeTreatment, ContinuousSpendMatchesHandCount) {
  // Levels relative to a0=0, a1=1: treated are 0.9, 0.51, 1.7, 0.75 -> 4 treated, 6 control.
  const std::vector<double> levels{0.1, 0.9, 0.5, 0.51, 0.0, 1.7, 0.49, 0.75, 0.3, -0.2};
  const std::vector<double> y(10, 1.0);
  auto s = causal::label_samples(levels, y, {}, binary_spec());
  EXPECT_EQ(s.treated_count, 4u);
  EXPECT_EQ(s.control_count, 6u);
  EXPECT_EQ(s.samples[3].level, 0.51);
}

TEST(BinarizeTreatment, DegenerateArmIsError) {
  EXPECT_THROW(samples_from({1, 1, 1}, {1, 2, 3}), causal::DegenerateArmError);
  EXPECT_THROW(samples_from({0, 0}, {1, 2}), causal::DegenerateArmError);
}

TEST(BinarizeTreatment, DatasetUnitsAreSeries) {
  synth::GeneratorConfig c;
  c.nodes = 20;
  c.edge_probability = 0.1;
  c.series = 30;
  c.steps = 30;
  auto b = synth::generate(c);
  auto s = causal::binarize_treatment(b.data, binary_spec());
  ASSERT_EQ(s.samples.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(s.samples[i].treated, b.truth.treated[i] == 1);
}

TEST(FitPropensity, IndependentBalancedTreatmentIsNearHalf) {
  // Per draw, the empirical treated fraction alone wanders by ~0.016, so a
  // single unlucky draw can sit near the band edge; require it on most draws.
  std::size_t good_draws = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<int> arm;
    std::vector<double> x, y;
    for (int i = 0; i < 1000; ++i) {
      arm.push_back(coin(rng) ? 1 : 0);
      x.push_back(u(rng));
      y.push_back(0.0);
    }
    auto s = samples_from(arm, y, x);
    auto m = causal::fit_propensity(s);
    std::size_t near = 0;
    for (const auto& smp : s.samples) near += std::abs(m.predict(smp.covariates) - 0.5) <= 0.05;
    good_draws += near >= 950u;
    EXPECT_GE(near, 800u) << "seed " << seed;
    EXPECT_TRUE(m.warnings.empty());
  }
  EXPECT_GE(good_draws, 18u);
}

TEST(FitPropensity, MatchesNewtonRaphsonMle) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> gauss;
  std::vector<int> arm;
  std::vector<double> x, y;
  for (int i = 0; i < 400; ++i) {
    const double v = gauss(rng);
    x.push_back(v);
    arm.push_back(std::bernoulli_distribution(1.0 / (1.0 + std::exp(-(0.3 + 0.8 * v))))(rng) ? 1 : 0);
    y.push_back(0.0);
  }
  // Newton iterations on the raw (unstandardized) two-parameter likelihood.
  double b0 = 0.0, b1 = 0.0;
  for (int it = 0; it < 50; ++it) {
    double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * x[i])));
      g0 += arm[i] - p;
      g1 += (arm[i] - p) * x[i];
      const double w = p * (1 - p);
      h00 += w;
      h01 += w * x[i];
      h11 += w * x[i] * x[i];
    }
    const double det = h00 * h11 - h01 * h01;
    b0 += (h11 * g0 - h01 * g1) / det;
    b1 += (h00 * g1 - h01 * g0) / det;
  }
  auto m = causal::fit_propensity(samples_from(arm, y, x));
  for (double v : {-1.5, 0.0, 0.7, 2.0}) {
    const double in[] = {v};
    EXPECT_NEAR(m.raw(in), 1.0 / (1.0 + std::exp(-(b0 + b1 * v))), 1e-6);
  }
}

TEST(FitPropensity, InterceptOnlyGivesTreatedFraction) {
  auto s = samples_from({1, 0, 0, 1, 0, 0, 0, 1}, std::vector<double>(8, 0.0));
  auto m = causal::fit_propensity(s);
  ASSERT_EQ(m.coefficients.size(), 1u);
  EXPECT_NEAR(m.predict({}), 3.0 / 8.0, 1e-9);
}

TEST(FitPropensity, PlantedConfoundingCorrelatesWithSentiment) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<int> arm;
  std::vector<double> x, y;
  for (int i = 0; i < 600; ++i) {
    const double s = u(rng);
    arm.push_back(std::bernoulli_distribution(1.0 / (1.0 + std::exp(-2.0 * s)))(rng) ? 1 : 0);
    x.push_back(s);
    y.push_back(0.0);
  }
  auto m = causal::fit_propensity(samples_from(arm, y, x));
  EXPECT_GT(m.coefficients[1], 0.0);
  const double lo[] = {-0.8}, hi[] = {0.8};
  EXPECT_LT(m.predict(lo), m.predict(hi));
}

TEST(FitPropensity, SeparationClipsAndWarns) {
  std::vector<int> arm;
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    arm.push_back(i < 20 ? 0 : 1);
    x.push_back(i < 20 ? -1.0 - 0.01 * i : 1.0 + 0.01 * i);
    y.push_back(0.0);
  }
  auto s = samples_from(arm, y, x);
  auto m = causal::fit_propensity(s);
  EXPECT_FALSE(m.warnings.empty());
  for (const auto& smp : s.samples) {
    const double p = m.predict(smp.covariates);
    EXPECT_GE(p, 0.05);
    EXPECT_LE(p, 0.95);
    EXPECT_DOUBLE_EQ(p, smp.treated ? 0.95 : 0.05);
  }
}

TEST(FitPropensity, ClippedOutputsStayInBounds) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0, 3);
  std::vector<int> arm;
  std::vector<double> x, y;
  for (int i = 0; i < 300; ++i) {
    const double v = gauss(rng);
    x.push_back(v);
    arm.push_back(std::bernoulli_distribution(1.0 / (1.0 + std::exp(-3 * v)))(rng) ? 1 : 0);
    y.push_back(0.0);
  }
  auto m = causal::fit_propensity(samples_from(arm, y, x));
  for (double v = -20; v <= 20; v += 0.5) {
    const double in[] = {v};
    EXPECT_GE(m.predict(in), 0.05);
    EXPECT_LE(m.predict(in), 0.95);
  }
}

TEST(EstimateAce, ConstantPropensityIsDifferenceOfMeans) {
  auto s = samples_from({1, 1, 0, 0}, {2, 4, 1, 1});
  auto est = causal::estimate_ace(s, constant_model(0.5));
  EXPECT_DOUBLE_EQ(est.ace, 2.0);
  EXPECT_DOUBLE_EQ(est.treated_mean, 3.0);
  EXPECT_DOUBLE_EQ(est.control_mean, 1.0);
  EXPECT_EQ(est.treated_count, 2u);
  EXPECT_DOUBLE_EQ(est.propensity_mean, 0.5);
}

TEST(EstimateAce, IdenticalOutcomesGiveZero) {
  auto s = samples_from({1, 0, 1, 0, 0}, {3, 3, 3, 3, 3}, {0.1, -0.3, 0.9, 0.2, -1});
  EXPECT_NEAR(causal::estimate_ace(s, causal::fit_propensity(s)).ace, 0.0, 1e-12);
}

TEST(EstimateAce, EmptyArmIsError) {
  const std::uint8_t arm[] = {1, 1};
  const double y[] = {1, 2}, e[] = {0.5, 0.5};
  EXPECT_THROW(causal::hajek_estimate(arm, y, e), causal::DegenerateArmError);
}

TEST(EstimateAce, AlgebraicProperties) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint8_t> arm;
    std::vector<double> y, e, half;
    for (int i = 0; i < 50; ++i) {
      arm.push_back(i % 3 == 0 ? 1 : 0);
      y.push_back(gauss(rng));
      e.push_back(u(rng));
      half.push_back(0.5);
    }
    auto base = causal::hajek_estimate(arm, y, e);
    EXPECT_NEAR(base.ace, base.treated_mean - base.control_mean, 0.0);

    // e = 0.5 is the unweighted difference of means.
    double st = 0, sc = 0, nt = 0, nc = 0;
    for (std::size_t i = 0; i < y.size(); ++i) (arm[i] ? st : sc) += y[i], (arm[i] ? nt : nc) += 1;
    EXPECT_NEAR(causal::hajek_estimate(arm, y, half).ace, st / nt - sc / nc, 1e-12);

    // Shift and scale of outcomes.
    std::vector<double> shifted(y), scaled(y);
    for (auto& v : shifted) v += 7.5;
    for (auto& v : scaled) v *= -2.5;
    EXPECT_NEAR(causal::hajek_estimate(arm, shifted, e).ace, base.ace, 1e-12);
    EXPECT_NEAR(causal::hajek_estimate(arm, scaled, e).ace, -2.5 * base.ace, 1e-12);

    // Multiplying every weight by c > 0 is a no-op for the self-normalized arms.
    double wt = 0, wyt = 0, wc = 0, wyc = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double w = 3.7 * (arm[i] ? 1.0 / e[i] : 1.0 / (1.0 - e[i]));
      (arm[i] ? wt : wc) += w;
      (arm[i] ? wyt : wyc) += w * y[i];
    }
    EXPECT_NEAR(wyt / wt - wyc / wc, base.ace, 1e-12);
  }
}

TEST(EstimateAce, RecoversPlantedEffectUnderConfounding) {
  synth::GeneratorConfig c;  // bundled defaults: beta_A = 1.5, gamma = 1
  auto b = synth::generate(c);
  auto s = causal::binarize_treatment(b.data, binary_spec());
  auto m = causal::fit_propensity(s);
  const double ipw = causal::estimate_ace(s, m).ace;
  const double naive = causal::naive_difference(s);
  EXPECT_LE(std::abs(ipw - 1.5), 0.15);
  EXPECT_GT(std::abs(naive - 1.5), 0.3);
  EXPECT_GT(std::abs(naive - 1.5), 2.0 * std::abs(ipw - 1.5));
}

TEST(CcsScore, Examples) {
  const double truth[] = {1.0, -2.0, 0.05};
  EXPECT_DOUBLE_EQ(causal::ccs_score(truth, truth), 1.0);
  const double single_pred[] = {1.1}, single_truth[] = {1.0};
  EXPECT_NEAR(causal::ccs_score(single_pred, single_truth), 0.9, 1e-12);
  const double far[] = {3.0, 0.5, 0.3};
  EXPECT_EQ(causal::ccs_score(far, truth), 0.0);
  EXPECT_THROW(causal::ccs_score({}, {}), causal::UnsupportedDatasetError);
  EXPECT_THROW(causal::ccs_score(single_pred, truth), std::invalid_argument);
}

TEST(CcsScore, AlwaysInUnitIntervalAndOneOnlyWhenExact) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(20), t(20);
    for (std::size_t i = 0; i < 20; ++i) {
      t[i] = gauss(rng);
      p[i] = t[i] + (trial % 2 ? gauss(rng) * 0.1 : 0.0);
    }
    const double s = causal::ccs_score(p, t);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_EQ(s == 1.0, p == t);
  }
}
