// Copyright 2026 The qkrr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qkrr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <gtest/gtest.h>

#include "qkrr/error.hpp"
#include "qkrr/parallel.hpp"
#include "test_util.hpp"

namespace qkrr::pipeline {
namespace {

using encoding::FeatureEncoder;
using testing::random_dataset;
using testing::random_point;

std::vector<FeatureEncoder> all_encoders() {
  return {encoding::Amplitude{},          encoding::PolyTensor{2},
          encoding::PolyTensor{3},        encoding::AffineAmplitude{0.8, 2},
          encoding::Coherent{},           encoding::PositionWavepacket{},
          encoding::Evolution{}};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Composite Gauss-Legendre over [-h, h]^2.
template <class F>
double square_integral(F&& f, double h) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  auto inner = [&](double x) {
    return Rule::integrate([&](double y) { return f(x, y); }, -h, h);
  };
  return Rule::integrate(inner, -h, h);
}

TEST(Tier, NamesRoundTrip) {
  for (Tier t : {Tier::kIdeal, Tier::kCvAnalytic, Tier::kCvGrid, Tier::kShotSampled}) {
    EXPECT_EQ(parse_tier(to_string(t)), t);
  }
  EXPECT_THROW(parse_tier("exact"), ContractError);
}

TEST(Config, RejectsInvalidFields) {
  PipelineConfig c;
  EXPECT_NO_THROW(validate(c));
  c.chi = -1.0;
  EXPECT_THROW(validate(c), ContractError);
  c = {};
  c.s = 0.0;
  EXPECT_THROW(validate(c), ContractError);
  c = {};
  c.eta = -0.5;
  EXPECT_THROW(validate(c), ContractError);
  c = {};
  c.epsilon_q = std::nan("");
  EXPECT_THROW(validate(c), ContractError);
  c = {};
  c.tier = Tier::kShotSampled;
  c.shots = 0;
  EXPECT_THROW(validate(c), ContractError);
}

TEST(ReferenceState, SingleSampleIsProductOfUnitVectors) {
  const Dataset d({Sample{{0.3, 0.4}, -2.0}});
  const auto psi = dv::prepare_psi_A(d, encoding::Amplitude{});
  const std::vector<double> a{0.0, 2.0};
  const auto r = build_reference_state(d, encoding::Amplitude{}, a, psi);
  EXPECT_NEAR(r.global_norm, 4.0, 1e-14);
  EXPECT_NEAR(r.amplitudes(0, 0).real(), 0.0, 1e-14);
  EXPECT_NEAR(r.amplitudes(0, 1).real(), -1.0, 1e-14);
}

TEST(ReferenceState, OverlapWithPsiAIsKernelWeightedTargets) {
  Rng rng(5);
  for (const auto& enc : all_encoders()) {
    for (auto mode : {dv::PreparationMode::kExplicit, dv::PreparationMode::kSpan}) {
      const Dataset d = random_dataset(rng, 6, 2, 0.7);
      const auto a = random_point(rng, 2, 0.7);
      const auto psi = dv::prepare_psi_A(d, enc, mode);
      const auto r = build_reference_state(d, enc, a, psi);
      EXPECT_NEAR(r.amplitudes.squaredNorm(), 1.0, 1e-10) << encoding::describe(enc);
      const RealVector y = d.targets();
      const RealVector k = krr::kernel_vector(d, enc, a);
      const double phi_norm = r.global_norm / y.norm();
      const double expected = y.dot(k) / (psi.global_norm * y.norm() * phi_norm);
      const Complex got = (psi.amplitudes.conjugate().array() * r.amplitudes.array()).sum();
      EXPECT_NEAR(got.real(), expected, 1e-10) << encoding::describe(enc);
      EXPECT_NEAR(got.imag(), 0.0, 1e-10);
    }
  }
}

TEST(ReferenceState, Errors) {
  const Dataset zero({Sample{{0.3}, 0.0}, Sample{{0.5}, 0.0}});
  const auto psi = dv::prepare_psi_A(zero, encoding::Coherent{});
  const std::vector<double> a{0.1};
  EXPECT_THROW(build_reference_state(zero, encoding::Coherent{}, a, psi), DataError);
  const std::vector<double> wrong{0.1, 0.2};
  EXPECT_THROW(build_reference_state(zero, encoding::Coherent{}, wrong, psi), ContractError);
}

TEST(Transform, UnitSingularValueWithoutRidge) {
  dv::SchmidtData s;
  s.coefficients = RealVector::Ones(1);
  s.sample_vectors = ComplexMatrix::Ones(1, 1);
  s.feature_vectors = ComplexMatrix::Ones(1, 1);
  const auto t = singular_value_transform_ideal(s, 1.0, 0.0, dv::FeatureBasis::kExplicit);
  EXPECT_DOUBLE_EQ(t.weights(0), 1.0);
  EXPECT_DOUBLE_EQ(t.weight_norm, 1.0);
}

TEST(Transform, WeightsAndSingularCase) {
  dv::SchmidtData s;
  s.coefficients = RealVector{{0.8, 0.6}};
  s.sample_vectors = ComplexMatrix::Identity(2, 2);
  s.feature_vectors = ComplexMatrix::Identity(2, 2);
  const auto t = singular_value_transform_ideal(s, 5.0, 1.0, dv::FeatureBasis::kExplicit);
  EXPECT_NEAR(t.weights(0), 4.0 / 17.0, 1e-15);
  EXPECT_NEAR(t.weights(1), 3.0 / 10.0, 1e-15);
  EXPECT_NEAR(t.state.amplitudes.squaredNorm(), 1.0, 1e-14);

  s.coefficients = RealVector{{1.0, 0.0}};
  EXPECT_THROW(singular_value_transform_ideal(s, 1.0, 0.0, dv::FeatureBasis::kExplicit),
               RegularizationRequired);
  EXPECT_NO_THROW(singular_value_transform_ideal(s, 1.0, 0.1, dv::FeatureBasis::kExplicit));
}

TEST(InnerProduct, ExactAndShapeErrors) {
  dv::HybridPureState a;
  a.amplitudes = ComplexMatrix::Zero(2, 2);
  a.amplitudes(0, 0) = 1.0;
  dv::HybridPureState b = a;
  b.amplitudes(0, 0) = std::sqrt(0.5);
  b.amplitudes(1, 1) = std::sqrt(0.5);
  const auto ip = predict_inner_product(a, b);
  EXPECT_NEAR(ip.y_prime, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(ip.success_prob, 0.5 * (1.0 + std::sqrt(0.5)), 1e-15);
  EXPECT_EQ(ip.std_error, 0.0);

  dv::HybridPureState c;
  c.amplitudes = ComplexMatrix::Zero(2, 3);
  EXPECT_THROW(predict_inner_product(a, c), ContractError);
  EXPECT_THROW(predict_inner_product(a, b, ShotSpec{0, 1}), ContractError);
}

TEST(InnerProduct, ShotsAreReproducibleAndUnbiased) {
  dv::HybridPureState a;
  a.amplitudes = ComplexMatrix::Zero(1, 2);
  a.amplitudes(0, 0) = 1.0;
  dv::HybridPureState b = a;
  b.amplitudes(0, 0) = 0.6;
  b.amplitudes(0, 1) = 0.8;
  const auto first = predict_inner_product(a, b, ShotSpec{20000, 9});
  const auto second = predict_inner_product(a, b, ShotSpec{20000, 9});
  EXPECT_EQ(first.y_prime, second.y_prime);
  const double p = first.success_prob;
  EXPECT_NEAR(first.std_error, 2.0 * std::sqrt(p * (1.0 - p) / 20000.0), 1e-15);
  EXPECT_LE(std::abs(first.y_prime - 0.6), 5.0 * first.std_error);
}

TEST(Rescale, ProductOfConstants) {
  EXPECT_DOUBLE_EQ(rescale_prediction(0.5, {2.0, 3.0, 4.0}), 12.0);
  EXPECT_THROW(rescale_prediction(0.5, {0.0, 3.0, 4.0}), ContractError);
  EXPECT_THROW(rescale_prediction(0.5, {1.0, INFINITY, 4.0}), ContractError);
}

TEST(Ideal, SingleSampleExample) {
  // One sample, phi(a_1) = phi(a) = 1: prediction y / (1 + chi).
  const Dataset d({Sample{{0.0}, 3.0}});
  PipelineConfig c;
  c.chi = 0.5;
  const QuantumRegressor q(d, encoding::Coherent{}, c);
  const std::vector<double> a{0.0};
  const auto r = q.predict(a);
  EXPECT_NEAR(r.y_quantum, 2.0, 1e-12);
  EXPECT_NEAR(r.y_oracle, 2.0, 1e-12);
  EXPECT_NEAR(r.y_prime, 1.0, 1e-12);
}

TEST(Ideal, MatchesOracleForEveryEncoderAndBasis) {
  Rng rng(11);
  for (const auto& enc : all_encoders()) {
    for (auto mode : {dv::PreparationMode::kExplicit, dv::PreparationMode::kSpan}) {
      for (int trial = 0; trial < 3; ++trial) {
        const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform() * 14);
        const Dataset d = random_dataset(rng, m, 2, 0.7);
        PipelineConfig c;
        c.chi = 0.05 + rng.uniform();
        c.preparation = mode;
        const QuantumRegressor q(d, enc, c);
        const auto a = random_point(rng, 2, 0.7);
        const auto r = q.predict(a);
        const double svd = krr::predict_svd(d, enc, c.chi, a);
        EXPECT_NEAR(r.y_quantum, r.y_oracle, 1e-10 * std::max(1.0, std::abs(r.y_oracle)))
            << encoding::describe(enc) << " M=" << m;
        EXPECT_NEAR(r.y_quantum, svd, 1e-10 * std::max(1.0, std::abs(svd)));
        EXPECT_LE(std::abs(r.y_prime), 1.0);
      }
    }
  }
}

TEST(Ideal, RankDeficientWithoutRidgeNamesTheStep) {
  const Dataset d({Sample{{1.0, 0.0}, 1.0}, Sample{{2.0, 0.0}, 2.0}, Sample{{0.0, 1.0}, 0.5}});
  PipelineConfig c;
  c.chi = 0.0;
  try {
    QuantumRegressor q(d, encoding::Amplitude{}, c);
    FAIL() << "expected RegularizationRequired";
  } catch (const RegularizationRequired& e) {
    EXPECT_NE(std::string(e.what()).find("step 2"), std::string::npos) << e.what();
  }
}

TEST(CvAnalytic, ConvergesToOracleAsResourceGrows) {
  Rng rng(3);
  const Dataset d = random_dataset(rng, 8, 4, 0.5);
  const auto a = random_point(rng, 4, 0.5);
  double previous = INFINITY;
  for (double s : {2.0, 4.0, 8.0, 16.0}) {
    PipelineConfig c;
    c.chi = 2.0;
    c.s = s;
    c.tier = Tier::kCvAnalytic;
    const QuantumRegressor q(d, encoding::Coherent{}, c);
    const auto r = q.predict(a);
    EXPECT_LT(r.abs_error, previous) << "s=" << s;
    previous = r.abs_error;
    const double amin = q.alphas().minCoeff();
    if (amin * amin * std::pow(s, 4) >= 1e4) EXPECT_LE(r.rel_error, 0.02);
  }
}

TEST(CvAnalytic, DefaultEtaKeepsPhasesInUnitInterval) {
  Rng rng(8);
  const Dataset d = random_dataset(rng, 6, 2, 0.6);
  PipelineConfig c;
  c.chi = 0.3;
  const QuantumRegressor q(d, encoding::Coherent{}, c);
  EXPECT_NEAR(q.alphas().maxCoeff(), 1.0, 1e-12);
  EXPECT_GT(q.alphas().minCoeff(), 0.0);
}

TEST(CvGrid, OriginMatchesClosedFormTier) {
  Rng rng(21);
  const Dataset d = random_dataset(rng, 8, 4, 0.5);
  for (double s : {2.0, 4.0}) {
    PipelineConfig c;
    c.chi = 2.0;
    c.s = s;
    c.tier = Tier::kCvAnalytic;
    const QuantumRegressor analytic(d, encoding::Coherent{}, c);
    c.tier = Tier::kCvGrid;
    const QuantumRegressor grid(d, encoding::Coherent{}, c);
    for (int k = 0; k < 3; ++k) {
      const auto a = random_point(rng, 4, 0.5);
      const auto x = analytic.predict(a);
      const auto y = grid.predict(a);
      EXPECT_NEAR(y.y_quantum, x.y_quantum, 1e-6 * std::abs(x.y_quantum));
      EXPECT_NEAR(y.origin_density, x.origin_density, 1e-6 * x.origin_density);
      EXPECT_EQ(y.headline, "origin");
    }
  }
}

TEST(CvGrid, CollapsedStateApproachesIdealState) {
  Rng rng(9);
  const Dataset d = random_dataset(rng, 8, 4, 0.5);
  PipelineConfig c;
  c.chi = 1.0;
  c.tier = Tier::kCvGrid;
  c.eta = 2.0 * QuantumRegressor(d, encoding::Coherent{}, c).eta();
  double previous = 0.0;
  bool exercised = false;
  for (double s : {2.0, 4.0, 8.0, 16.0}) {
    c.s = s;
    const QuantumRegressor q(d, encoding::Coherent{}, c);
    const double trace = q.trace();
    cv::PhaseBlockState state(q.grid(), s, q.schmidt().coefficients);
    state.apply_conditional_phase(q.eta() * trace, q.schmidt().coefficients.cwiseAbs2());
    state.apply_regularization(q.eta() * trace, c.chi / trace);
    const ComplexVector collapsed = state.postselect(0.0, 0.0).dv_weights;
    const auto ideal = singular_value_transform_ideal(q.schmidt(), q.psi_A().global_norm, c.chi,
                                                      q.psi_A().basis);
    // Both states live in the same Schmidt basis, so the overlap reduces to
    // the coefficient vectors.
    const Complex overlap = ideal.weights.cast<Complex>().dot(collapsed);
    const double fidelity = std::norm(overlap) / (ideal.weights.squaredNorm() *
                                                  collapsed.squaredNorm());
    EXPECT_GT(fidelity, previous) << "s=" << s;
    previous = fidelity;
    const double amin = q.alphas().minCoeff();
    if (amin * amin * std::pow(s, 4) >= 1e4) {
      exercised = true;
      EXPECT_GE(fidelity, 0.999) << "s=" << s;
    }
  }
  EXPECT_TRUE(exercised);
}

TEST(CvGrid, HomodyneWindowAveragesAcceptedSamples) {
  Rng rng(4);
  const Dataset d = random_dataset(rng, 4, 2, 0.5);
  PipelineConfig c;
  c.chi = 1.0;
  c.s = 2.0;
  c.epsilon_q = 0.2;
  c.tier = Tier::kCvGrid;
  c.homodyne_draws = 20000;
  c.seed = 17;
  const QuantumRegressor q(d, encoding::Coherent{}, c);
  const auto a = random_point(rng, 2, 0.5);
  const auto r = q.predict(a);
  EXPECT_EQ(r.total_shots, 20000u);
  ASSERT_GT(r.accepted_shots, 0u);
  EXPECT_EQ(r.headline, "window");
  double sum = 0.0;
  const double half = 0.5 * std::sqrt(c.epsilon_q);
  for (const auto& w : r.window) {
    EXPECT_LE(std::abs(w.q1), half);
    EXPECT_LE(std::abs(w.q2), half);
    sum += w.y_quantum;
  }
  EXPECT_NEAR(r.y_quantum, sum / static_cast<double>(r.window.size()), 1e-12);
  const double p = window_probability(q.schmidt().coefficients, q.alphas(), c.s, c.epsilon_q);
  const double rate = static_cast<double>(r.accepted_shots) / 20000.0;
  EXPECT_NEAR(rate, p, 5.0 * std::sqrt(p * (1.0 - p) / 20000.0) + 0.01 * p);
  const auto again = q.predict(a);
  EXPECT_EQ(again.y_quantum, r.y_quantum);
}

TEST(CvGrid, OversizedMaterializationIsRejected) {
  Rng rng(6);
  const Dataset d = random_dataset(rng, 8, 2, 0.5);
  PipelineConfig c;
  c.s = 16.0;
  c.tier = Tier::kCvGrid;
  c.homodyne_draws = 10;
  try {
    QuantumRegressor q(d, encoding::Coherent{}, c);
    FAIL() << "expected ContractError";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("step 4"), std::string::npos) << e.what();
  }
}

TEST(ShotSampled, WithinFourStandardErrors) {
  Rng rng(12);
  const Dataset d = random_dataset(rng, 6, 2, 0.5);
  PipelineConfig c;
  c.chi = 1.0;
  c.s = 4.0;
  c.tier = Tier::kCvGrid;
  const QuantumRegressor exact(d, encoding::Coherent{}, c);
  c.tier = Tier::kShotSampled;
  c.shots = 20000;
  int inside = 0;
  const auto a = random_point(rng, 2, 0.5);
  const auto reference = exact.predict(a);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    c.seed = seed;
    const QuantumRegressor q(d, encoding::Coherent{}, c);
    const auto r = q.predict(a);
    EXPECT_EQ(r.shots, 20000u);
    const double se = 2.0 * std::sqrt(r.success_prob * (1.0 - r.success_prob) / 20000.0);
    if (std::abs(r.y_prime - reference.y_prime) <= 4.0 * se) ++inside;
  }
  EXPECT_GE(inside, 38);
}

TEST(Pipeline, TierErrorsAreOrderedAcrossSeeds) {
  std::vector<double> ideal, analytic, grid, shots;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    const Dataset d = random_dataset(rng, 6, 2, 0.5);
    const auto a = random_point(rng, 2, 0.5);
    PipelineConfig c;
    c.chi = 1.0;
    c.s = 2.0;
    c.epsilon_q = 0.1;
    c.shots = 500;
    c.homodyne_draws = 20000;
    c.seed = seed;
    auto error = [&](Tier t) {
      c.tier = t;
      return QuantumRegressor(d, encoding::Coherent{}, c).predict(a).abs_error;
    };
    ideal.push_back(error(Tier::kIdeal));
    analytic.push_back(error(Tier::kCvAnalytic));
    grid.push_back(error(Tier::kCvGrid));
    shots.push_back(error(Tier::kShotSampled));
  }
  EXPECT_LE(median(ideal), median(analytic));
  EXPECT_LE(median(analytic), median(grid));
  EXPECT_LE(median(grid), median(shots));
}

TEST(Pipeline, PolyTensorMatchesOracle) {
  Rng rng(31);
  const Dataset d = random_dataset(rng, 10, 3);
  PipelineConfig c;
  c.chi = 0.2;
  std::vector<std::vector<double>> points;
  for (int k = 0; k < 5; ++k) points.push_back(random_point(rng, 3));
  for (const auto& r : run_regression(d, encoding::PolyTensor{2}, c, points)) {
    EXPECT_NEAR(r.y_quantum, r.y_oracle, 1e-10 * std::max(1.0, std::abs(r.y_oracle)));
  }
}

TEST(Pipeline, RunRegressionIsDeterministicAcrossThreadCounts) {
  Rng rng(41);
  const Dataset d = random_dataset(rng, 5, 2, 0.5);
  PipelineConfig c;
  c.chi = 0.5;
  c.s = 2.0;
  c.tier = Tier::kShotSampled;
  c.shots = 500;
  std::vector<std::vector<double>> points;
  for (int k = 0; k < 6; ++k) points.push_back(random_point(rng, 2, 0.5));
  const std::size_t saved = max_workers();
  set_max_workers(1);
  const auto serial = run_regression(d, encoding::Coherent{}, c, points);
  set_max_workers(4);
  const auto threaded = run_regression(d, encoding::Coherent{}, c, points);
  set_max_workers(saved);
  ASSERT_EQ(serial.size(), threaded.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    EXPECT_EQ(serial[k].index, k);
    EXPECT_EQ(serial[k].y_quantum, threaded[k].y_quantum);
  }
}

TEST(Pipeline, BadTestPointIsNamed) {
  const Dataset d({Sample{{0.1, 0.2}, 1.0}, Sample{{0.3, 0.1}, 2.0}});
  const std::vector<std::vector<double>> points{{0.0, 0.0}, {1.0}};
  try {
    run_regression(d, encoding::Coherent{}, PipelineConfig{}, points);
    FAIL() << "expected ContractError";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("test point 1"), std::string::npos) << e.what();
  }
}

TEST(WindowProbability, MatchesQuadratureOfClosedFormDensity) {
  const RealVector coeffs{{0.8, 0.6}};
  const RealVector alphas{{0.7, 0.3}};
  for (double s : {1.0, 3.0}) {
    for (double eps : {0.01, 0.5}) {
      const double h = 0.5 * std::sqrt(eps);
      double expected = 0.0;
      for (int i = 0; i < 2; ++i) {
        expected += coeffs(i) * coeffs(i) * square_integral(
                                                [&](double x, double y) {
                                                  return std::norm(
                                                      cv::analytic_B(alphas(i), s, x, y));
                                                },
                                                h);
      }
      EXPECT_NEAR(window_probability(coeffs, alphas, s, eps), expected, 1e-12 * expected + 1e-15);
    }
  }
}

TEST(WindowProbability, DoublingWindowAtMostDoublesAcceptance) {
  const RealVector coeffs{{1.0}};
  for (double alpha : {0.0, 0.5, 2.0}) {
    for (double s : {0.5, 2.0, 8.0}) {
      for (double eps : {1e-3, 1e-2, 1e-1}) {
        const RealVector a{{alpha}};
        const double p1 = window_probability(coeffs, a, s, eps);
        const double p2 = window_probability(coeffs, a, s, 2.0 * eps);
        EXPECT_GT(p2, p1);
        EXPECT_LE(p2, 2.0 * p1 * (1.0 + 1e-12));
      }
    }
  }
}

TEST(SuccessRate, LogLogSlopeOfPowerLaw) {
  const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
  const std::vector<double> y{3.0, 3.0 * std::pow(2.0, 1.5), 3.0 * 8.0, 3.0 * std::pow(8.0, 1.5)};
  EXPECT_NEAR(log_log_slope(x, y), 1.5, 1e-12);
  const std::vector<double> bad{1.0, -1.0, 2.0, 3.0};
  EXPECT_THROW(log_log_slope(x, bad), NumericalError);
}

TEST(SuccessRate, ScalingAndControl) {
  Rng rng(2);
  const Dataset d = random_dataset(rng, 8, 4, 0.5);
  std::vector<double> eps;
  for (int k = 0; k <= 8; ++k) eps.push_back(1e-3 * std::pow(10.0, k / 4.0));
  const auto study = success_rate_study(d, encoding::Coherent{}, std::nullopt, 1.0, eps);
  EXPECT_NEAR(study.slope, 1.5, 0.3);
  ASSERT_EQ(study.points.size(), eps.size());
  EXPECT_GT(study.points.front().s, study.points.back().s);
  const auto control = success_rate_control(0.05, eps);
  EXPECT_NEAR(control.slope, 1.0, 0.05);
}

TEST(SuccessRate, RejectsNarrowSweeps) {
  const Dataset d({Sample{{0.1}, 1.0}, Sample{{0.4}, 2.0}});
  EXPECT_THROW(success_rate_control(1.0, {1e-3, 2e-3, 3e-3, 4e-3, 5e-3}), ContractError);
  EXPECT_THROW(success_rate_control(1.0, {1e-3, 1e-1}), ContractError);
  EXPECT_THROW(success_rate_study(d, encoding::Coherent{}, std::nullopt, 0.1, {1e-3, 1e-1}),
               ContractError);
}

}  // namespace
}  // namespace qkrr::pipeline
