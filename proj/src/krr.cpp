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

#include "qkrr/krr.hpp"

#include <cmath>
#include <sstream>

#include "qkrr/error.hpp"

namespace qkrr::krr {
namespace {

constexpr std::size_t kMaxExplicitEntries = std::size_t{1} << 22;
constexpr double kSingularTolerance = 1e-10;

void require_chi(double chi) {
  if (!(chi >= 0.0) || !std::isfinite(chi)) {
    throw ContractError("regularization chi must be a finite nonnegative number");
  }
}

void require_point(const Dataset& data, std::span<const double> a_new) {
  if (a_new.size() != data.dimension()) {
    throw ContractError("prediction input has " + std::to_string(a_new.size()) +
                        " features, training data has " +
                        std::to_string(data.dimension()));
  }
}

double real_kernel(const encoding::EncodedState& x, const encoding::EncodedState& y) {
  return (encoding::overlap(x, y) * x.norm * y.norm).real();
}

RealMatrix gram_from_states(const std::vector<encoding::EncodedState>& states) {
  const auto m = static_cast<Eigen::Index>(states.size());
  RealMatrix k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const double v = real_kernel(states[static_cast<std::size_t>(i)],
                                   states[static_cast<std::size_t>(j)]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

encoding::EncodedState encode_query(const encoding::FeatureEncoder& enc,
                                    std::span<const double> a_new) {
  return with_context("prediction input", [&] { return encoding::encode(enc, a_new); });
}

}  // namespace

std::vector<encoding::EncodedState> encode_all(const Dataset& data,
                                               const encoding::FeatureEncoder& enc) {
  std::vector<encoding::EncodedState> states;
  states.reserve(data.size());
  for (std::size_t m = 0; m < data.size(); ++m) {
    states.push_back(with_context("sample " + std::to_string(m), [&] {
      return encoding::encode(enc, data[m].features);
    }));
  }
  return states;
}

RealMatrix gram(const Dataset& data, const encoding::FeatureEncoder& enc) {
  return gram_from_states(encode_all(data, enc));
}

RealVector kernel_vector(const Dataset& data, const encoding::FeatureEncoder& enc,
                         std::span<const double> a_new) {
  require_point(data, a_new);
  const auto states = encode_all(data, enc);
  const auto query = encode_query(enc, a_new);
  RealVector k(static_cast<Eigen::Index>(states.size()));
  for (std::size_t m = 0; m < states.size(); ++m) {
    k(static_cast<Eigen::Index>(m)) = real_kernel(states[m], query);
  }
  return k;
}

KrrModel fit(const Dataset& data, const encoding::FeatureEncoder& enc, double chi,
             FitOptions options) {
  require_chi(chi);
  auto states = encode_all(data, enc);
  const RealMatrix k = gram_from_states(states);
  const RealVector y = data.targets();
  const auto m = k.rows();

  KrrModel model{chi, RealVector(), data, enc, std::move(states), {}};
  for (const auto& s : model.states) {
    for (const auto& w : s.warnings) model.warnings.push_back(w);
  }

  if (chi == 0.0) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(k);
    const RealVector& values = eig.eigenvalues();
    if (values(0) <= kSingularTolerance) {
      if (!options.allow_pseudo_inverse) {
        std::ostringstream msg;
        msg << "regularization required: K has eigenvalue " << values(0)
            << " and chi = 0";
        throw RegularizationRequired(msg.str());
      }
      const double cutoff = kSingularTolerance * values(m - 1);
      RealVector coeffs = eig.eigenvectors().transpose() * y;
      for (Eigen::Index i = 0; i < m; ++i) {
        coeffs(i) = values(i) > cutoff ? coeffs(i) / values(i) : 0.0;
      }
      model.dual_weights = eig.eigenvectors() * coeffs;
      model.warnings.push_back("K is rank-deficient; solved with a pseudo-inverse");
      return model;
    }
  }

  const RealMatrix regularized = k + chi * RealMatrix::Identity(m, m);
  Eigen::LLT<RealMatrix> llt(regularized);
  if (llt.info() == Eigen::Success) {
    model.dual_weights = llt.solve(y);
  } else {
    Eigen::LDLT<RealMatrix> ldlt(regularized);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError("fit: could not factor K + chi I");
    }
    model.dual_weights = ldlt.solve(y);
  }
  return model;
}

double predict(const KrrModel& model, std::span<const double> a_new) {
  require_point(model.data, a_new);
  const auto query = encode_query(model.encoder, a_new);
  double out = 0.0;
  for (std::size_t m = 0; m < model.states.size(); ++m) {
    out += model.dual_weights(static_cast<Eigen::Index>(m)) *
           real_kernel(model.states[m], query);
  }
  return out;
}

bool explicit_route_feasible(const Dataset& data, const encoding::FeatureEncoder& enc) {
  const std::size_t f = encoding::feature_dimension(enc, data.dimension());
  return f <= kMaxExplicitEntries / data.size();
}

double predict_svd(const Dataset& data, const encoding::FeatureEncoder& enc,
                   double chi, std::span<const double> a_new, SpectralRoute route) {
  require_chi(chi);
  require_point(data, a_new);
  if (route == SpectralRoute::kAuto) {
    route = explicit_route_feasible(data, enc) ? SpectralRoute::kExplicit
                                               : SpectralRoute::kSpan;
  }
  const auto states = encode_all(data, enc);
  const auto query = encode_query(enc, a_new);
  const RealVector y = data.targets();
  const auto m = static_cast<Eigen::Index>(states.size());

  if (route == SpectralRoute::kExplicit) {
    const auto f = static_cast<Eigen::Index>(query.dimension());
    ComplexMatrix a(m, f);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& s = states[static_cast<std::size_t>(i)];
      a.row(i) = s.norm * s.amplitudes().transpose();
    }
    const ComplexVector phi_new = query.norm * query.amplitudes();
    if (chi == 0.0 && f < m) {
      throw RegularizationRequired(
          "regularization required: fewer features than samples and chi = 0");
    }
    const numerics::SvdResult svd = numerics::svd(a);
    Complex out = 0.0;
    for (Eigen::Index i = 0; i < svd.singular_values.size(); ++i) {
      const double lambda = svd.singular_values(i);
      if (chi == 0.0 && lambda * lambda <= kSingularTolerance) {
        throw RegularizationRequired(
            "regularization required: feature matrix has a vanishing singular value");
      }
      if (lambda == 0.0) continue;
      // A = sum_i lambda_i u_i v_i^H, so the feature-space vector is conj(v_i).
      const Complex uy = svd.left_vectors.col(i).dot(y.cast<Complex>());
      const Complex phi_overlap = (svd.right_vectors.col(i).array() * phi_new.array()).sum();
      out += lambda / (lambda * lambda + chi) * uy * phi_overlap;
    }
    return out.real();
  }

  // Span basis: K = W diag(lambda^2) W^T and <phi_i, phi(a)> = w_i . k / lambda_i.
  const RealMatrix k = gram_from_states(states);
  RealVector kv(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    kv(i) = real_kernel(states[static_cast<std::size_t>(i)], query);
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(k);
  const RealVector& values = eig.eigenvalues();
  if (chi == 0.0 && values(0) <= kSingularTolerance) {
    throw RegularizationRequired("regularization required: K is singular and chi = 0");
  }
  double out = 0.0;
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    const double lambda2 = std::max(values(i), 0.0);
    const double lambda = std::sqrt(lambda2);
    const double uy = eig.eigenvectors().col(i).dot(y);
    const double wk = eig.eigenvectors().col(i).dot(kv);
    if (lambda == 0.0) continue;
    out += lambda / (lambda2 + chi) * uy * (wk / lambda);
  }
  return out;
}

}  // namespace qkrr::krr
