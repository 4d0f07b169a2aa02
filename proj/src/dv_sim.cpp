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

#include "qkrr/dv_sim.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "qkrr/error.hpp"
#include "qkrr/krr.hpp"

namespace qkrr::dv {
namespace {

constexpr std::size_t kMaxExplicitEntries = std::size_t{1} << 22;

RealMatrix gram_factor(const RealMatrix& k) {
  Eigen::LLT<RealMatrix> llt(k);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(k);
  const RealVector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal();
}

void validate_density(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw ContractError("dme: density matrix must be square and nonempty");
  }
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw ContractError("dme: density matrix is not Hermitian");
  }
  const Complex trace = rho.trace();
  if (std::abs(trace - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "dme: density matrix has trace " << trace.real();
    throw ContractError(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(rho, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues()(0) < -1e-10) {
    std::ostringstream msg;
    msg << "dme: density matrix has negative eigenvalue " << eig.eigenvalues()(0);
    throw ContractError(msg.str());
  }
}

// Liouville matrix of a linear map on M x M matrices, column-stacked.
template <class Map>
ComplexMatrix liouville(Eigen::Index dim, Map&& map) {
  const Eigen::Index d2 = dim * dim;
  ComplexMatrix out(d2, d2);
  for (Eigen::Index k = 0; k < dim; ++k) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      ComplexMatrix basis = ComplexMatrix::Zero(dim, dim);
      basis(j, k) = 1.0;
      const ComplexMatrix image = map(basis);
      out.col(j + k * dim) = Eigen::Map<const ComplexVector>(image.data(), d2);
    }
  }
  return out;
}

ComplexMatrix swap_operator(Eigen::Index dim) {
  ComplexMatrix s = ComplexMatrix::Zero(dim * dim, dim * dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      s(j * dim + i, i * dim + j) = 1.0;
    }
  }
  return s;
}

}  // namespace

HybridPureState prepare_psi_A(const Dataset& data, const encoding::FeatureEncoder& enc,
                              PreparationMode mode) {
  const auto states = krr::encode_all(data, enc);
  const auto m = static_cast<Eigen::Index>(states.size());

  double trace = 0.0;
  for (const auto& s : states) trace += s.norm * s.norm;
  if (!(trace > 0.0)) {
    throw NumericalError("prepare_psi_A: all feature vectors vanish");
  }
  const double global_norm = std::sqrt(trace);

  if (mode == PreparationMode::kAuto) {
    const std::size_t f = states.front().dimension();
    mode = f <= kMaxExplicitEntries / states.size() ? PreparationMode::kExplicit
                                                    : PreparationMode::kSpan;
  }

  HybridPureState out;
  out.global_norm = global_norm;
  if (mode == PreparationMode::kExplicit) {
    const auto f = static_cast<Eigen::Index>(states.front().dimension());
    out.amplitudes.resize(m, f);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& s = states[static_cast<std::size_t>(i)];
      out.amplitudes.row(i) = (s.norm / global_norm) * s.amplitudes().transpose();
    }
    out.basis = FeatureBasis::kExplicit;
    return out;
  }

  RealMatrix k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const auto& a = states[static_cast<std::size_t>(i)];
      const auto& b = states[static_cast<std::size_t>(j)];
      const double v = (encoding::overlap(a, b) * a.norm * b.norm).real();
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  out.amplitudes = ComplexMatrix::Zero(m, m + 1);
  out.amplitudes.leftCols(m) = (gram_factor(k) / global_norm).cast<Complex>();
  out.basis = FeatureBasis::kSpan;
  return out;
}

ComplexMatrix reduced_density(const HybridPureState& state) {
  if (state.amplitudes.size() == 0) {
    throw ContractError("reduced_density: empty state");
  }
  return state.amplitudes * state.amplitudes.adjoint();
}

SchmidtData schmidt(const HybridPureState& state) {
  const numerics::SvdResult svd = numerics::svd(state.amplitudes);
  return {svd.singular_values, svd.left_vectors, svd.right_vectors.conjugate()};
}

ComplexMatrix assemble(const SchmidtData& basis, const RealVector& weights) {
  if (weights.size() != basis.coefficients.size()) {
    throw ContractError("assemble: weight count does not match Schmidt rank");
  }
  return basis.sample_vectors * weights.cast<Complex>().asDiagonal() *
         basis.feature_vectors.transpose();
}

DmeResult dme_approximate(const ComplexMatrix& rho, double t, int n_copies) {
  validate_density(rho);
  if (n_copies < 1) {
    throw ContractError("dme: n_copies must be >= 1");
  }
  if (!std::isfinite(t)) {
    throw ContractError("dme: time must be finite");
  }
  const Eigen::Index dim = rho.rows();
  const double step = t / n_copies;
  const ComplexMatrix partial_swap =
      std::cos(step) * ComplexMatrix::Identity(dim * dim, dim * dim) +
      Complex(0.0, std::sin(step)) * swap_operator(dim);
  const std::array<std::size_t, 2> dims{static_cast<std::size_t>(dim),
                                        static_cast<std::size_t>(dim)};

  const ComplexMatrix one_step = liouville(dim, [&](const ComplexMatrix& sigma) {
    const ComplexMatrix joint =
        partial_swap * numerics::kron(rho, sigma) * partial_swap.adjoint();
    return numerics::partial_trace(joint, dims, 1);
  });
  ComplexMatrix channel = ComplexMatrix::Identity(dim * dim, dim * dim);
  for (int i = 0; i < n_copies; ++i) channel = one_step * channel;

  const ComplexMatrix u = numerics::matrix_exponential(rho, Complex(0.0, t));
  const ComplexMatrix target = liouville(
      dim, [&](const ComplexMatrix& sigma) -> ComplexMatrix { return u * sigma * u.adjoint(); });

  DmeResult out{channel, target, numerics::spectral_norm(channel - target), 0.0};
  out.error_constant = t == 0.0 ? 0.0 : out.error * n_copies / (t * t);
  return out;
}

}  // namespace qkrr::dv
