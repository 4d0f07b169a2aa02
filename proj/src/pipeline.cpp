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
#include <limits>
#include <numbers>
#include <sstream>

#include "qkrr/error.hpp"
#include "qkrr/parallel.hpp"
#include "qkrr/random.hpp"

namespace qkrr::pipeline {
namespace {

constexpr double kSingularTolerance = 1e-10;
constexpr double kImaginaryTolerance = 1e-10;
// Complex samples held at once by the materialized homodyne path.
constexpr std::size_t kMaxMaterializedEntries = std::size_t{1} << 24;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::size_t index, std::uint64_t stream) {
  return splitmix64(splitmix64(seed ^ splitmix64(index)) + stream);
}

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    std::ostringstream msg;
    msg << "config: " << name << " must be finite and > 0, got " << value;
    throw ContractError(msg.str());
  }
}

InnerProduct estimate_from_overlap(Complex overlap, std::optional<ShotSpec> shots) {
  InnerProduct out;
  out.overlap = overlap;
  const double exact = std::clamp(overlap.real(), -1.0, 1.0);
  if (!shots) {
    out.y_prime = exact;
    out.success_prob = 0.5 * (1.0 + exact);
    return out;
  }
  if (shots->shots == 0) {
    throw ContractError("inner product: shots must be >= 1");
  }
  const double p = 0.5 * (1.0 + exact);
  Rng rng(shots->seed);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < shots->shots; ++k) hits += rng.bernoulli(p) ? 1 : 0;
  const double n = static_cast<double>(shots->shots);
  const double p_hat = static_cast<double>(hits) / n;
  out.success_prob = p_hat;
  out.y_prime = 2.0 * p_hat - 1.0;
  out.std_error = 2.0 * std::sqrt(p_hat * (1.0 - p_hat) / n);
  return out;
}


double relative_error(double value, double reference) {
  const double err = std::abs(value - reference);
  return std::abs(reference) > 0.0 ? err / std::abs(reference)
                                   : (err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
}

cv::QumodeGrid make_grid(const PipelineConfig& config, double alpha_max) {
  if (config.grid_points > 0) {
    const double extent = config.grid_extent > 0.0 ? config.grid_extent : 7.0 * config.s;
    return cv::QumodeGrid(config.grid_points, extent);
  }
  return cv::QumodeGrid::for_resource(config.s, alpha_max);
}

}  // namespace

std::string to_string(Tier tier) {
  switch (tier) {
    case Tier::kIdeal:
      return "ideal";
    case Tier::kCvAnalytic:
      return "cv-analytic";
    case Tier::kCvGrid:
      return "cv-grid";
    case Tier::kShotSampled:
      return "shot-sampled";
  }
  return "unknown";
}

Tier parse_tier(std::string_view text) {
  for (Tier t : {Tier::kIdeal, Tier::kCvAnalytic, Tier::kCvGrid, Tier::kShotSampled}) {
    if (text == to_string(t)) return t;
  }
  throw ContractError("unknown tier '" + std::string(text) +
                      "' (expected ideal, cv-analytic, cv-grid or shot-sampled)");
}

void validate(const PipelineConfig& config) {
  if (config.eta) require_positive(*config.eta, "eta");
  if (!std::isfinite(config.chi) || config.chi < 0.0) {
    std::ostringstream msg;
    msg << "config: chi must be finite and >= 0, got " << config.chi;
    throw ContractError(msg.str());
  }
  require_positive(config.s, "s");
  require_positive(config.epsilon_q, "epsilon_q");
  if (config.tier == Tier::kShotSampled && config.shots == 0) {
    throw ContractError("config: shots must be >= 1 for the shot-sampled tier");
  }
  if (config.grid_extent < 0.0 || !std::isfinite(config.grid_extent)) {
    throw ContractError("config: grid_extent must be finite and >= 0");
  }
}

dv::HybridPureState build_reference_state(const Dataset& data,
                                          const encoding::FeatureEncoder& enc,
                                          std::span<const double> a_new,
                                          const dv::HybridPureState& psi_A) {
  if (a_new.size() != data.dimension()) {
    std::ostringstream msg;
    msg << "reference state: test point has " << a_new.size() << " features, expected "
        << data.dimension();
    throw ContractError(msg.str());
  }
  if (psi_A.samples() != static_cast<Eigen::Index>(data.size())) {
    throw ContractError("reference state: psi_A does not match the dataset");
  }
  const RealVector y = data.targets();
  const double y_norm = y.norm();
  if (!(y_norm > 0.0)) {
    throw DataError("reference state: target vector is zero");
  }
  const encoding::EncodedState query = encoding::encode(enc, a_new);
  if (!(query.norm > 0.0)) {
    throw NumericalError("reference state: feature vector of the test point vanishes");
  }

  ComplexVector feature;
  if (psi_A.basis == dv::FeatureBasis::kExplicit) {
    if (static_cast<Eigen::Index>(query.dimension()) != psi_A.features()) {
      throw ContractError("reference state: feature dimension does not match psi_A");
    }
    feature = query.amplitudes();
  } else {
    const auto m = psi_A.samples();
    if (psi_A.features() != m + 1) {
      throw ContractError("reference state: span-basis psi_A must have M + 1 features");
    }
    // phi_m = sum_k L(m, k) e_k, so the span coordinates c of phi(a) solve
    // L c = k(a) (least squares when L is rank deficient).
    const RealMatrix factor = psi_A.amplitudes.leftCols(m).real() * psi_A.global_norm;
    const RealVector kv = krr::kernel_vector(data, enc, a_new);
    const RealVector c = factor.completeOrthogonalDecomposition().solve(kv) / query.norm;
    feature = ComplexVector::Zero(m + 1);
    feature.head(m) = c.cast<Complex>();
    feature(m) = std::sqrt(std::max(0.0, 1.0 - c.squaredNorm()));
  }

  dv::HybridPureState out;
  out.basis = psi_A.basis;
  out.global_norm = y_norm * query.norm;
  out.amplitudes = (y / y_norm).cast<Complex>() * feature.transpose();
  return out;
}

TransformedState singular_value_transform_ideal(const dv::SchmidtData& schmidt,
                                                double global_norm, double chi,
                                                dv::FeatureBasis basis) {
  if (!std::isfinite(chi) || chi < 0.0) {
    throw ContractError("transform: chi must be finite and >= 0");
  }
  const Eigen::Index r = schmidt.coefficients.size();
  if (chi == 0.0 && r < schmidt.sample_vectors.rows()) {
    throw RegularizationRequired(
        "regularization required: Schmidt rank below the sample count and chi = 0");
  }
  TransformedState out;
  out.weights.resize(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double lambda = schmidt.coefficients(i) * global_norm;
    if (chi == 0.0 && lambda <= kSingularTolerance) {
      throw RegularizationRequired(
          "regularization required: vanishing singular value and chi = 0");
    }
    out.weights(i) = lambda == 0.0 ? 0.0 : lambda / (lambda * lambda + chi);
  }
  out.weight_norm = out.weights.norm();
  if (!(out.weight_norm > 0.0)) {
    throw NumericalError("transform: all transformed weights vanish");
  }
  out.state.basis = basis;
  out.state.global_norm = out.weight_norm;
  out.state.amplitudes = dv::assemble(schmidt, out.weights / out.weight_norm);
  return out;
}

InnerProduct predict_inner_product(const dv::HybridPureState& a_bar,
                                   const dv::HybridPureState& r,
                                   std::optional<ShotSpec> shots) {
  if (a_bar.samples() != r.samples() || a_bar.features() != r.features()) {
    std::ostringstream msg;
    msg << "inner product: shapes " << a_bar.samples() << "x" << a_bar.features() << " and "
        << r.samples() << "x" << r.features() << " differ";
    throw ContractError(msg.str());
  }
  if (a_bar.basis != r.basis) {
    throw ContractError("inner product: states use different feature bases");
  }
  return estimate_from_overlap(
      (a_bar.amplitudes.conjugate().array() * r.amplitudes.array()).sum(), shots);
}

double rescale_prediction(double y_prime, const Bookkeeping& book) {
  for (double v : {book.transform_norm, book.target_norm, book.feature_norm}) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw ContractError("rescale: bookkeeping constants must be finite and > 0");
    }
  }
  return book.transform_norm * book.target_norm * book.feature_norm * y_prime;
}

dv::HybridPureState QuantumRegressor::prepare(const Dataset& data,
                                              const encoding::FeatureEncoder& enc,
                                              const PipelineConfig& config) {
  validate(config);
  encoding::validate(enc);
  return with_context("step 1 (load |psi_A>)",
                      [&] { return dv::prepare_psi_A(data, enc, config.preparation); });
}

krr::KrrModel QuantumRegressor::fit_oracle(const dv::SchmidtData& schmidt,
                                           const dv::HybridPureState& psi_A) const {
  if (config_.chi == 0.0) {
    with_context("step 2 (spectral transform)", [&] {
      singular_value_transform_ideal(schmidt, psi_A.global_norm, 0.0, psi_A.basis);
    });
  }
  return with_context("classical oracle", [&] { return krr::fit(data_, enc_, config_.chi); });
}

QuantumRegressor::QuantumRegressor(Dataset data, encoding::FeatureEncoder enc,
                                   PipelineConfig config)
    : data_(std::move(data)),
      enc_(std::move(enc)),
      config_(std::move(config)),
      psi_A_(prepare(data_, enc_, config_)),
      schmidt_(dv::schmidt(psi_A_)),
      oracle_(fit_oracle(schmidt_, psi_A_)),
      grid_(64, 1.0) {
  const double g = psi_A_.global_norm;
  const double lambda_max = schmidt_.coefficients(0) * g;
  eta_ = config_.eta ? *config_.eta : 1.0 / (lambda_max * lambda_max + config_.chi);
  alphas_.resize(schmidt_.coefficients.size());
  for (Eigen::Index i = 0; i < alphas_.size(); ++i) {
    const double lambda = schmidt_.coefficients(i) * g;
    alphas_(i) = eta_ * (lambda * lambda + config_.chi);
  }
  const double trace = g * g;
  const double s = config_.s;
  const Eigen::Index r = schmidt_.coefficients.size();
  if (config_.tier == Tier::kCvAnalytic) {
    origin_weights_.resize(r);
    for (Eigen::Index i = 0; i < r; ++i) {
      origin_weights_(i) = schmidt_.coefficients(i) * cv::analytic_B(alphas_(i), s, 0.0, 0.0);
    }
    return;
  }
  if (config_.tier == Tier::kIdeal) return;

  grid_ = with_context("step 2 (phase estimation)",
                       [&] { return make_grid(config_, alphas_.maxCoeff()); });
  const RealVector kappa = schmidt_.coefficients.cwiseAbs2();
  cv::PhaseBlockState state(grid_, s, schmidt_.coefficients);
  with_context("step 2 (phase estimation)",
               [&] { state.apply_conditional_phase(eta_ * trace, kappa); });
  with_context("step 3 (regularization)",
               [&] { state.apply_regularization(eta_ * trace, config_.chi / trace); });
  origin_weights_ = with_context("step 4 (homodyne postselection)",
                                 [&] { return state.postselect(0.0, 0.0).dv_weights; });
  if (config_.homodyne_draws == 0) return;

  const std::size_t g_points = grid_.points();
  if (static_cast<std::size_t>(r) * g_points * g_points > kMaxMaterializedEntries) {
    std::ostringstream msg;
    msg << "step 4 (homodyne postselection): sampling needs " << r << " blocks of "
        << g_points << "^2 grid values, above the limit of " << kMaxMaterializedEntries
        << "; lower s or set homodyne_draws = 0";
    throw ContractError(msg.str());
  }
  cv::JointState joint = with_context("step 2 (phase estimation)", [&] {
    return cv::conditional_phase(
        cv::make_joint_state(schmidt_.coefficients, cv::prepare_G12(grid_, s)), eta_ * trace,
        kappa);
  });
  joint = with_context("step 3 (regularization)", [&] {
    return cv::regularization_gate(std::move(joint), eta_ * trace, config_.chi / trace);
  });
  position_state_ = cv::to_position(std::move(joint));
}

PredictionResult QuantumRegressor::predict(std::span<const double> a_new,
                                           std::size_t index) const {
  PredictionResult out;
  out.index = index;
  out.tier = config_.tier;
  out.y_oracle = krr::predict(oracle_, a_new);

  const dv::HybridPureState reference = with_context("step 5 (inner product)", [&] {
    return build_reference_state(data_, enc_, a_new, psi_A_);
  });
  const double target_norm = data_.targets().norm();
  const double feature_norm = reference.global_norm / target_norm;

  if (config_.tier == Tier::kIdeal) {
    const TransformedState t = with_context("step 2 (spectral transform)", [&] {
      return singular_value_transform_ideal(schmidt_, psi_A_.global_norm, config_.chi,
                                            psi_A_.basis);
    });
    const InnerProduct ip = predict_inner_product(t.state, reference);
    if (std::abs(ip.overlap.imag()) > kImaginaryTolerance) {
      std::ostringstream msg;
      msg << "step 5 (inner product): overlap has imaginary part " << ip.overlap.imag();
      throw NumericalError(msg.str());
    }
    out.y_prime = ip.y_prime;
    out.success_prob = ip.success_prob;
    out.y_quantum = rescale_prediction(ip.y_prime, {t.weight_norm, target_norm, feature_norm});
  } else {
    predict_cv(reference, target_norm, feature_norm,
               derive_seed(config_.seed, index, 0), out);
  }
  out.abs_error = std::abs(out.y_quantum - out.y_oracle);
  out.rel_error = relative_error(out.y_quantum, out.y_oracle);
  return out;
}

void QuantumRegressor::predict_cv(const dv::HybridPureState& reference, double target_norm,
                                  double feature_norm, std::uint64_t seed,
                                  PredictionResult& out) const {
  // |B(alpha, s, 0, 0)| -> 1 / (sqrt(pi) s alpha) for alpha s^2 >> 1; undoing
  // that constant and eta maps lambda_hat_i B_i back to lambda_i / (lambda_i^2 + chi).
  const double scale = std::sqrt(std::numbers::pi) * config_.s * eta_ * psi_A_.global_norm;
  // <u_i phi_i|reference>: a collapsed state sum_i d_i |u_i phi_i> then has
  // overlap sum_i conj(d_i) projection_i.
  const ComplexMatrix rows = schmidt_.sample_vectors.adjoint() * reference.amplitudes;
  const ComplexVector projection =
      (rows.array() * schmidt_.feature_vectors.transpose().conjugate().array()).rowwise().sum();

  struct Estimate {
    double y_prime = 0.0;
    double y_quantum = 0.0;
    double std_error = 0.0;
  };
  const bool sampled = config_.tier == Tier::kShotSampled;
  auto estimate = [&](const ComplexVector& dv_weights, std::size_t shots,
                      std::uint64_t shot_seed) {
    const double norm = dv_weights.norm();
    if (!(norm > 0.0)) {
      throw NumericalError("step 4 (homodyne postselection): collapsed DV state vanishes");
    }
    std::optional<ShotSpec> spec;
    if (sampled) spec = ShotSpec{shots, shot_seed};
    const InnerProduct ip = with_context("step 5 (inner product)", [&] {
      return estimate_from_overlap(dv_weights.dot(projection) / norm, spec);
    });
    const Bookkeeping book{scale * norm, target_norm, feature_norm};
    return Estimate{ip.y_prime, rescale_prediction(ip.y_prime, book),
                    book.transform_norm * target_norm * feature_norm * ip.std_error};
  };

  out.origin_density = origin_weights_.squaredNorm();
  const Estimate at_origin = estimate(origin_weights_, config_.shots, derive_seed(seed, 0, 1));
  out.y_prime = at_origin.y_prime;
  out.y_quantum = at_origin.y_quantum;
  out.std_error = at_origin.std_error;
  if (sampled) out.shots = config_.shots;

  if (!position_state_) {
    out.success_prob = 0.5 * (1.0 + out.y_prime);
    return;
  }
  const cv::JointState& joint = *position_state_;
  const auto outcomes = with_context("step 4 (homodyne postselection)", [&] {
    return cv::homodyne_sample(joint, derive_seed(seed, 0, 2), config_.homodyne_draws);
  });
  const double half = 0.5 * std::sqrt(config_.epsilon_q);
  out.total_shots = outcomes.size();
  // Grid outcomes stand for cells of side dq; a uniform offset inside the cell
  // makes the window test see a continuous outcome.
  Rng jitter(derive_seed(seed, 0, 4));
  const double dq = grid_.position_spacing();
  std::vector<cv::HomodyneOutcome> accepted;
  for (const auto& o : outcomes) {
    cv::HomodyneOutcome c = o;
    c.q1 += (jitter.uniform() - 0.5) * dq;
    c.q2 += (jitter.uniform() - 0.5) * dq;
    if (std::abs(c.q1) <= half && std::abs(c.q2) <= half) accepted.push_back(c);
  }
  // The shot budget is shared by the accepted outcomes.
  const std::size_t n_accepted = accepted.size();
  if (sampled && n_accepted > 0) out.shots = 0;
  double sum_y = 0.0;
  double sum_prime = 0.0;
  double sum_var = 0.0;
  for (std::size_t k = 0; k < n_accepted; ++k) {
    const auto& o = accepted[k];
    const cv::Postselection post =
        cv::postselect(joint, grid_.position(o.i1), grid_.position(o.i2));
    const std::size_t share = std::max<std::size_t>(
        1, config_.shots / n_accepted + (k < config_.shots % n_accepted ? 1 : 0));
    if (sampled) out.shots += share;
    const Estimate e = estimate(post.dv_weights, share, derive_seed(seed, k, 3));
    out.window.push_back({o.q1, o.q2, e.y_prime, e.y_quantum});
    sum_y += e.y_quantum;
    sum_prime += e.y_prime;
    sum_var += e.std_error * e.std_error;
  }
  out.accepted_shots = n_accepted;
  if (n_accepted > 0) {
    const double n = static_cast<double>(n_accepted);
    out.headline = "window";
    out.y_quantum = sum_y / n;
    out.y_prime = sum_prime / n;
    out.std_error = std::sqrt(sum_var) / n;
  }
  out.success_prob = 0.5 * (1.0 + out.y_prime);
}

std::vector<PredictionResult> run_regression(const Dataset& data,
                                             const encoding::FeatureEncoder& enc,
                                             const PipelineConfig& config,
                                             const std::vector<std::vector<double>>& test_points) {
  const QuantumRegressor regressor(data, enc, config);
  std::vector<PredictionResult> results(test_points.size());
  parallel_for(test_points.size(), [&](std::size_t k) {
    std::ostringstream prefix;
    prefix << "test point " << k;
    results[k] = with_context(prefix.str(), [&] { return regressor.predict(test_points[k], k); });
  });
  return results;
}

double window_probability(const RealVector& coefficients, const RealVector& alphas, double s,
                          double epsilon_q) {
  if (coefficients.size() != alphas.size()) {
    throw ContractError("window probability: coefficient and alpha counts differ");
  }
  require_positive(s, "s");
  require_positive(epsilon_q, "epsilon_q");
  // |B|^2 is a product of two centered Gaussians of variance s^2 det / 2, so
  // each axis contributes erf(h / (s sqrt(det))).
  const double half = 0.5 * std::sqrt(epsilon_q);
  double total = 0.0;
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    const double det = 1.0 / std::pow(s, 4) + alphas(i) * alphas(i);
    const double axis = std::erf(half / (s * std::sqrt(det)));
    total += coefficients(i) * coefficients(i) * axis * axis;
  }
  return total;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ContractError("slope fit: need >= 2 paired values");
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) {
      throw NumericalError("slope fit: values must be positive");
    }
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw NumericalError("slope fit: all x values coincide");
  return sxy / sxx;
}

namespace {

void require_sweep(const std::vector<double>& epsilon_q) {
  if (epsilon_q.size() < 5) {
    throw ContractError("success-rate study: need at least 5 epsilon_q values");
  }
  for (double e : epsilon_q) require_positive(e, "epsilon_q");
  const auto [lo, hi] = std::minmax_element(epsilon_q.begin(), epsilon_q.end());
  if (*hi / *lo < 100.0 * (1.0 - 1e-12)) {
    throw ContractError("success-rate study: epsilon_q values must span 2 decades");
  }
}

SuccessRateStudy finish(SuccessRateStudy study) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : study.points) {
    x.push_back(p.epsilon_q);
    y.push_back(p.probability);
  }
  study.slope = log_log_slope(x, y);
  return study;
}

}  // namespace

SuccessRateStudy success_rate_study(const Dataset& data, const encoding::FeatureEncoder& enc,
                                    std::optional<double> eta, double chi,
                                    const std::vector<double>& epsilon_q) {
  require_sweep(epsilon_q);
  PipelineConfig config;
  config.eta = eta;
  config.chi = chi;
  const QuantumRegressor model(data, enc, config);
  const RealVector& alphas = model.alphas();

  std::vector<double> sorted(alphas.data(), alphas.data() + alphas.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  SuccessRateStudy study;
  study.alpha_typical = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  for (double e : epsilon_q) {
    const double s = std::pow(study.alpha_typical * study.alpha_typical * e, -0.25);
    study.points.push_back(
        {e, s, window_probability(model.schmidt().coefficients, alphas, s, e)});
  }
  return finish(std::move(study));
}

SuccessRateStudy success_rate_control(double s, const std::vector<double>& epsilon_q) {
  require_sweep(epsilon_q);
  require_positive(s, "s");
  SuccessRateStudy study;
  const RealVector one = RealVector::Ones(1);
  const RealVector zero = RealVector::Zero(1);
  for (double e : epsilon_q) study.points.push_back({e, s, window_probability(one, zero, s, e)});
  return finish(std::move(study));
}

}  // namespace qkrr::pipeline
