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

#pragma once

// End-to-end quantum regression: |psi_A> preparation, spectral transform of
// the Schmidt coefficients (exactly, through the closed-form ancilla
// amplitudes, or through the simulated qumodes), and the ancilla-test inner
// product with |y> (x) |psi_a>, rescaled to a prediction.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qkrr/cv_sim.hpp"
#include "qkrr/dataset.hpp"
#include "qkrr/dv_sim.hpp"
#include "qkrr/encoding.hpp"
#include "qkrr/krr.hpp"

namespace qkrr::pipeline {

enum class Tier { kIdeal, kCvAnalytic, kCvGrid, kShotSampled };

std::string to_string(Tier tier);
/// "ideal", "cv-analytic", "cv-grid", "shot-sampled"; ContractError otherwise.
Tier parse_tier(std::string_view text);

struct PipelineConfig {
  /// Phase-estimation strength in raw kernel units, so block i picks up
  /// alpha_i = eta (lambda_i^2 + chi). Unset: 1 / (lambda_max^2 + chi).
  std::optional<double> eta;
  double chi = 0.1;
  double s = 4.0;
  double epsilon_q = 0.01;
  Tier tier = Tier::kIdeal;
  std::size_t shots = 100000;
  /// Homodyne draws per test point; 0 postselects at the origin only.
  std::size_t homodyne_draws = 0;
  std::size_t grid_points = 0;  // 0: QumodeGrid::for_resource
  double grid_extent = 0.0;     // momentum extent; 0: 7 s
  std::uint64_t seed = 1;
  dv::PreparationMode preparation = dv::PreparationMode::kAuto;
};

/// Throws ContractError on invalid fields.
void validate(const PipelineConfig& config);

struct WindowSample {
  double q1 = 0.0;
  double q2 = 0.0;
  double y_prime = 0.0;
  double y_quantum = 0.0;
};

struct PredictionResult {
  std::size_t index = 0;
  Tier tier = Tier::kIdeal;
  double y_quantum = 0.0;
  double y_prime = 0.0;
  double y_oracle = 0.0;
  double success_prob = 0.0;  // (1 + y_prime) / 2
  double std_error = 0.0;     // of y_quantum; 0 for exact tiers
  double abs_error = 0.0;
  double rel_error = 0.0;
  /// "origin" or "window": where the headline prediction comes from.
  std::string headline = "origin";
  double origin_density = 0.0;  // sum_i |lambda_i B_i(0, 0)|^2 (CV tiers)
  std::size_t accepted_shots = 0;  // homodyne outcomes inside the window
  std::size_t total_shots = 0;     // homodyne draws
  std::size_t shots = 0;           // ancilla-test repetitions (ShotSampled)
  std::vector<WindowSample> window;
};

/// |y> (x) |psi_a> in the feature basis of psi_A, normalized, with
/// global_norm = |y| |phi(a)|. In the span basis the part of phi(a) outside
/// span{phi(a_m)} goes to the extra feature dimension. Throws DataError for a
/// zero target vector.
dv::HybridPureState build_reference_state(const Dataset& data,
                                          const encoding::FeatureEncoder& enc,
                                          std::span<const double> a_new,
                                          const dv::HybridPureState& psi_A);

struct TransformedState {
  dv::HybridPureState state;  // normalized
  RealVector weights;         // lambda_i / (lambda_i^2 + chi), raw units
  double weight_norm = 0.0;   // |weights|
};

/// Maps raw singular values lambda_i = coefficient_i * global_norm to
/// lambda_i / (lambda_i^2 + chi). Throws RegularizationRequired when chi = 0
/// and some lambda_i <= 1e-10.
TransformedState singular_value_transform_ideal(const dv::SchmidtData& schmidt,
                                                double global_norm, double chi,
                                                dv::FeatureBasis basis);

struct ShotSpec {
  std::size_t shots = 0;
  std::uint64_t seed = 0;
};

struct InnerProduct {
  double y_prime = 0.0;
  double success_prob = 0.0;
  double std_error = 0.0;
  Complex overlap;  // exact <a_bar|r>
};

/// Exact: y' = Re <a_bar|r>. With shots: n Bernoulli(p) trials, y' = 2 p_hat - 1
/// and stderr 2 sqrt(p_hat (1 - p_hat) / n). Throws ContractError on a shape
/// mismatch.
InnerProduct predict_inner_product(const dv::HybridPureState& a_bar,
                                   const dv::HybridPureState& r,
                                   std::optional<ShotSpec> shots = std::nullopt);

/// Constants that turn y' back into a prediction.
struct Bookkeeping {
  double transform_norm = 1.0;  // norm of the unnormalized transformed state
  double target_norm = 1.0;     // |y|
  double feature_norm = 1.0;    // |phi(a)|
};

/// y = transform_norm * target_norm * feature_norm * y'. Throws ContractError
/// unless every constant is finite and positive.
double rescale_prediction(double y_prime, const Bookkeeping& book);

/// Training-side state shared by all test points.
class QuantumRegressor {
 public:
  QuantumRegressor(Dataset data, encoding::FeatureEncoder enc, PipelineConfig config);

  PredictionResult predict(std::span<const double> a_new, std::size_t index = 0) const;

  double eta() const { return eta_; }
  /// eta (lambda_i^2 + chi) per Schmidt index.
  const RealVector& alphas() const { return alphas_; }
  const dv::SchmidtData& schmidt() const { return schmidt_; }
  const dv::HybridPureState& psi_A() const { return psi_A_; }
  double trace() const { return psi_A_.global_norm * psi_A_.global_norm; }
  const cv::QumodeGrid& grid() const { return grid_; }
  const PipelineConfig& config() const { return config_; }

 private:
  static dv::HybridPureState prepare(const Dataset& data, const encoding::FeatureEncoder& enc,
                                     const PipelineConfig& config);
  krr::KrrModel fit_oracle(const dv::SchmidtData& schmidt,
                           const dv::HybridPureState& psi_A) const;
  void predict_cv(const dv::HybridPureState& reference, double target_norm,
                  double feature_norm, std::uint64_t seed, PredictionResult& out) const;

  Dataset data_;
  encoding::FeatureEncoder enc_;
  PipelineConfig config_;
  dv::HybridPureState psi_A_;
  dv::SchmidtData schmidt_;
  krr::KrrModel oracle_;
  double eta_ = 0.0;
  RealVector alphas_;
  cv::QumodeGrid grid_;
  ComplexVector origin_weights_;  // lambda_hat_i psi_i(0, 0)
  std::optional<cv::JointState> position_state_;
};

/// Runs every test point (in parallel; results in input order). Errors are
/// annotated with the failing step.
std::vector<PredictionResult> run_regression(const Dataset& data,
                                             const encoding::FeatureEncoder& enc,
                                             const PipelineConfig& config,
                                             const std::vector<std::vector<double>>& test_points);

/// Probability that both homodyne outcomes land in the square of side
/// sqrt(epsilon_q) centered at the origin, from the closed-form density
/// sum_i coefficient_i^2 |B(alpha_i, s, q)|^2.
double window_probability(const RealVector& coefficients, const RealVector& alphas, double s,
                          double epsilon_q);

struct SuccessRatePoint {
  double epsilon_q = 0.0;
  double s = 0.0;
  double probability = 0.0;
};

struct SuccessRateStudy {
  std::vector<SuccessRatePoint> points;
  double alpha_typical = 0.0;
  double slope = 0.0;  // least-squares slope of log p against log epsilon_q
};

/// For each epsilon_q sets s = (alpha_typ^2 epsilon_q)^{-1/4} with
/// alpha_typ = eta (median lambda_i^2 + chi). Needs >= 5 values spanning
/// >= 2 decades (ContractError otherwise).
SuccessRateStudy success_rate_study(const Dataset& data, const encoding::FeatureEncoder& enc,
                                    std::optional<double> eta, double chi,
                                    const std::vector<double>& epsilon_q);

/// Control case: no phase (alpha = 0) and a fixed s.
SuccessRateStudy success_rate_control(double s, const std::vector<double>& epsilon_q);

/// Least-squares slope of log y against log x.
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace qkrr::pipeline
