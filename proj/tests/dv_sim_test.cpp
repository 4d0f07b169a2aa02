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

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "qkrr/error.hpp"
#include "qkrr/krr.hpp"
#include "test_util.hpp"

namespace qkrr::dv {
namespace {

using encoding::FeatureEncoder;
using testing::random_dataset;

std::vector<FeatureEncoder> all_encoders() {
  return {encoding::Amplitude{},     encoding::PolyTensor{2},
          encoding::AffineAmplitude{}, encoding::Coherent{},
          encoding::PositionWavepacket{}, encoding::Evolution{}};
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index dim) {
  return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

TEST(PreparePsiA, SingleSampleIsProductState) {
  const Dataset d({Sample{{3.0, 4.0}, 1.0}});
  const auto state = prepare_psi_A(d, encoding::Amplitude{}, PreparationMode::kExplicit);
  EXPECT_EQ(state.samples(), 1);
  EXPECT_NEAR(state.global_norm, 5.0, 1e-14);
  EXPECT_NEAR(state.amplitudes(0, 0).real(), 0.6, 1e-15);
  EXPECT_NEAR(state.amplitudes(0, 1).real(), 0.8, 1e-15);
}

TEST(PreparePsiA, OrthogonalEqualNormsAreMaximallyEntangled) {
  const Dataset d({Sample{{2.0, 0.0}, 1.0}, Sample{{0.0, -2.0}, 1.0}});
  for (auto mode : {PreparationMode::kExplicit, PreparationMode::kSpan}) {
    const auto state = prepare_psi_A(d, encoding::Amplitude{}, mode);
    const auto sd = schmidt(state);
    EXPECT_NEAR(sd.coefficients(0), 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(sd.coefficients(1), 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_LE(max_abs(reduced_density(state) - 0.5 * ComplexMatrix::Identity(2, 2)), 1e-15);
  }
}

TEST(PreparePsiA, CoherentSeed42SchmidtMatchesGramSpectrum) {
  Rng rng(42);
  const Dataset d = random_dataset(rng, 4, 2);
  const auto sd = schmidt(prepare_psi_A(d, encoding::Coherent{}));
  const RealMatrix k = krr::gram(d, encoding::Coherent{});
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(k / k.trace());
  const RealVector expected = eig.eigenvalues().reverse();
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(sd.coefficients(i) * sd.coefficients(i), expected(i), 1e-8);
  }
}

TEST(PreparePsiA, ChoosesSpanForHugeFeatureSpaces) {
  Rng rng(5);
  const Dataset d = random_dataset(rng, 4, 6, 0.3);
  const auto state = prepare_psi_A(d, encoding::Coherent{});
  EXPECT_EQ(state.basis, FeatureBasis::kSpan);
  EXPECT_EQ(state.features(), 5);
}

TEST(PreparePsiA, NamesFailingSample) {
  const Dataset d({Sample{{1.0}, 1.0}, Sample{{0.5}, 1.0}});
  try {
    prepare_psi_A(d, encoding::BasicQubit{});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("sample 1"), std::string::npos);
  }
}

TEST(ReducedDensity, ProductStateGivesProjector) {
  HybridPureState state;
  state.amplitudes = ComplexMatrix::Zero(3, 2);
  state.amplitudes(1, 0) = Complex(0.6, 0.0);
  state.amplitudes(1, 1) = Complex(0.0, 0.8);
  ComplexMatrix expected = ComplexMatrix::Zero(3, 3);
  expected(1, 1) = 1.0;
  EXPECT_LE(max_abs(reduced_density(state) - expected), 1e-15);
}

TEST(ReducedDensity, CoherentMatchesGramOverTrace) {
  Rng rng(97);
  const Dataset d = random_dataset(rng, 4, 2);
  const RealMatrix k = krr::gram(d, encoding::Coherent{});
  const ComplexMatrix rho = reduced_density(prepare_psi_A(d, encoding::Coherent{}));
  EXPECT_LE(max_abs(rho - (k / k.trace()).cast<Complex>()), 1e-10);
}

// Property: partial trace over the feature register reproduces K / Tr K.
TEST(DvProperty, ReducedDensityEqualsNormalizedGram) {
  Rng rng(101);
  for (const auto& enc : all_encoders()) {
    for (std::size_t m : {1u, 3u, 8u, 16u}) {
      const Dataset d = random_dataset(rng, m, 2, 0.8);
      const RealMatrix k = krr::gram(d, enc);
      for (auto mode : {PreparationMode::kExplicit, PreparationMode::kSpan}) {
        const auto state = prepare_psi_A(d, enc, mode);
        EXPECT_NEAR(state.global_norm * state.global_norm, k.trace(), 1e-8 * k.trace());
        EXPECT_NEAR(state.amplitudes.norm(), 1.0, 1e-12);
        EXPECT_LE(max_abs(reduced_density(state) - (k / k.trace()).cast<Complex>()), 1e-10)
            << encoding::describe(enc) << " M=" << m;
      }
    }
  }
}

TEST(DvProperty, SchmidtInvariantsAndModeAgreement) {
  Rng rng(103);
  for (const auto& enc : all_encoders()) {
    const Dataset d = random_dataset(rng, 7, 2, 0.8);
    const auto sx = schmidt(prepare_psi_A(d, enc, PreparationMode::kExplicit));
    const auto ss = schmidt(prepare_psi_A(d, enc, PreparationMode::kSpan));
    const RealMatrix k = krr::gram(d, enc);
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(k / k.trace());
    const RealVector expected = eig.eigenvalues().reverse().cwiseMax(0.0);
    for (const auto* sd : {&sx, &ss}) {
      EXPECT_NEAR(sd->coefficients.squaredNorm(), 1.0, 1e-10);
      const auto r = sd->coefficients.size();
      EXPECT_LE(max_abs(sd->sample_vectors.adjoint() * sd->sample_vectors -
                        ComplexMatrix::Identity(r, r)),
                1e-10);
      EXPECT_LE(max_abs(sd->feature_vectors.adjoint() * sd->feature_vectors -
                        ComplexMatrix::Identity(r, r)),
                1e-10);
      for (Eigen::Index i = 0; i < r; ++i) {
        EXPECT_NEAR(sd->coefficients(i) * sd->coefficients(i), expected(i), 1e-10)
            << encoding::describe(enc);
      }
    }
    // The same sample-side Schmidt vectors, up to phase, where the spectrum
    // is well separated.
    const Eigen::Index rank =
        std::min(sx.coefficients.size(), ss.coefficients.size());
    for (Eigen::Index i = 0; i < rank; ++i) {
      const double gap_lo = i + 1 < 7 ? expected(i) - expected(i + 1) : 1.0;
      const double gap_hi = i > 0 ? expected(i - 1) - expected(i) : 1.0;
      if (std::min(gap_lo, gap_hi) < 1e-4 || expected(i) < 1e-8) continue;
      EXPECT_NEAR(std::abs(sx.sample_vectors.col(i).dot(ss.sample_vectors.col(i))), 1.0,
                  1e-8)
          << encoding::describe(enc) << " i=" << i;
    }
  }
}

TEST(DvProperty, AssembleWithSchmidtCoefficientsRebuildsState) {
  Rng rng(107);
  const Dataset d = random_dataset(rng, 6, 2);
  for (auto mode : {PreparationMode::kExplicit, PreparationMode::kSpan}) {
    const auto state = prepare_psi_A(d, encoding::PolyTensor{2}, mode);
    const auto sd = schmidt(state);
    EXPECT_LE(max_abs(assemble(sd, sd.coefficients) - state.amplitudes), 1e-12);
  }
  const auto sd = schmidt(prepare_psi_A(d, encoding::Coherent{}));
  EXPECT_THROW(assemble(sd, RealVector::Ones(2)), ContractError);
}

TEST(DvProperty, PreparationIsPermutationEquivariant) {
  Rng rng(109);
  for (const auto& enc : all_encoders()) {
    const Dataset d = random_dataset(rng, 6, 2, 0.8);
    const std::vector<std::size_t> order{3, 0, 5, 1, 4, 2};
    const auto a = prepare_psi_A(d, enc, PreparationMode::kExplicit);
    const auto b = prepare_psi_A(d.permuted(order), enc, PreparationMode::kExplicit);
    for (std::size_t i = 0; i < order.size(); ++i) {
      EXPECT_LE(max_abs(b.amplitudes.row(static_cast<Eigen::Index>(i)) -
                        a.amplitudes.row(static_cast<Eigen::Index>(order[i]))),
                1e-15);
    }
    const ComplexMatrix ra = reduced_density(a);
    const ComplexMatrix rb = reduced_density(prepare_psi_A(d.permuted(order), enc,
                                                           PreparationMode::kSpan));
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (std::size_t j = 0; j < order.size(); ++j) {
        EXPECT_NEAR(std::abs(rb(i, j) - ra(order[i], order[j])), 0.0, 1e-10);
      }
    }
  }
}

TEST(Dme, ZeroTimeIsIdentity) {
  Rng rng(113);
  const auto r = dme_approximate(testing::random_density(rng, 3), 0.0, 5);
  EXPECT_LE(max_abs(r.channel - ComplexMatrix::Identity(9, 9)), 1e-15);
  EXPECT_LE(r.error, 1e-15);
}

TEST(Dme, SingleStepMatchesPartialSwapFormula) {
  Rng rng(127);
  const ComplexMatrix rho = testing::random_density(rng, 3);
  const ComplexMatrix sigma = testing::random_density(rng, 3);
  const double t = 0.4;
  const auto r = dme_approximate(rho, t, 1);
  const double c = std::cos(t);
  const double s = std::sin(t);
  const ComplexMatrix expected = c * c * sigma + s * s * sigma.trace() * rho +
                                 Complex(0.0, s * c) * (rho * sigma - sigma * rho);
  EXPECT_LE(max_abs(unvec(r.channel * vec(sigma), 3) - expected), 1e-14);
}

TEST(Dme, MaximallyMixedTargetIsIdentityChannel) {
  const int dim = 4;
  const ComplexMatrix rho = ComplexMatrix::Identity(dim, dim) / double(dim);
  for (int n : {1, 4, 32}) {
    const double t = 1.0;
    const auto r = dme_approximate(rho, t, n);
    // exp(i t I/M) is a global phase, so the conjugation is the identity.
    EXPECT_LE(max_abs(r.target - ComplexMatrix::Identity(dim * dim, dim * dim)), 1e-14);
    // Each step mixes towards I/M with weight sin^2(t/n).
    EXPECT_NEAR(r.error, 1.0 - std::pow(std::cos(t / n), 2 * n), 1e-12);
  }
}

TEST(Dme, ErrorDecaysLinearlyInCopies) {
  Rng rng(131);
  const ComplexMatrix rho = testing::random_density(rng, 4);
  std::vector<double> log_n;
  std::vector<double> log_err;
  for (int n : {8, 16, 32, 64, 128}) {
    const auto r = dme_approximate(rho, 1.0, n);
    log_n.push_back(std::log(n));
    log_err.push_back(std::log(r.error));
    EXPECT_LT(r.error_constant, 4.0);
  }
  const double mx = std::accumulate(log_n.begin(), log_n.end(), 0.0) / log_n.size();
  const double my = std::accumulate(log_err.begin(), log_err.end(), 0.0) / log_err.size();
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    sxy += (log_n[i] - mx) * (log_err[i] - my);
    sxx += (log_n[i] - mx) * (log_n[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, -1.0, 0.15);
}

TEST(Dme, RejectsInvalidDensities) {
  ComplexMatrix rho = ComplexMatrix::Identity(2, 2);
  EXPECT_THROW(dme_approximate(rho, 1.0, 2), ContractError);  // trace 2
  rho(0, 0) = 1.5;
  rho(1, 1) = -0.5;
  EXPECT_THROW(dme_approximate(rho, 1.0, 2), ContractError);  // negative eigenvalue
  rho = 0.5 * ComplexMatrix::Identity(2, 2);
  rho(0, 1) = Complex(0.0, 0.1);
  EXPECT_THROW(dme_approximate(rho, 1.0, 2), ContractError);  // not Hermitian
  EXPECT_THROW(dme_approximate(ComplexMatrix::Zero(2, 3), 1.0, 2), ContractError);
  EXPECT_THROW(dme_approximate(0.5 * ComplexMatrix::Identity(2, 2), 1.0, 0), ContractError);
}

}  // namespace
}  // namespace qkrr::dv
