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

// Qubit-register side of the regression algorithm: the emulated memory load
// of sum_m |phi(a_m)| |m>|psi_{a_m}>, its Schmidt structure, the reduced
// density matrix K / Tr K, and the density-matrix exponentiation channel.

#include "qkrr/dataset.hpp"
#include "qkrr/encoding.hpp"
#include "qkrr/numerics.hpp"

namespace qkrr::dv {

enum class FeatureBasis {
  kExplicit,  // full feature basis of the encoder
  kSpan,      // orthonormal basis of span{phi(a_m)} plus one out-of-span direction
};

/// Pure state on (sample register) (x) (feature register), stored as the
/// M x F amplitude matrix X with X(m, f) = <m, f|psi>. ||X||_F = 1.
/// `global_norm` is the norm of the unnormalized state.
struct HybridPureState {
  ComplexMatrix amplitudes;
  double global_norm = 1.0;
  FeatureBasis basis = FeatureBasis::kExplicit;

  Eigen::Index samples() const { return amplitudes.rows(); }
  Eigen::Index features() const { return amplitudes.cols(); }
};

enum class PreparationMode { kAuto, kExplicit, kSpan };

/// Amplitudes proportional to sum_m |phi(a_m)| |m> (x) |psi_{a_m}>; global
/// norm sqrt(Tr K). The span mode stores a factor L of K = L L^T (Cholesky, or
/// an eigen square root when K is singular) plus a zero column, so the feature
/// register has M + 1 dimensions. kAuto picks explicit when M * F <= 2^22.
HybridPureState prepare_psi_A(const Dataset& data, const encoding::FeatureEncoder& enc,
                              PreparationMode mode = PreparationMode::kAuto);

/// Sample-register density matrix X X^H (the feature register traced out).
ComplexMatrix reduced_density(const HybridPureState& state);

/// psi = sum_i coefficients(i) |u_i> (x) |phi_i>.
struct SchmidtData {
  RealVector coefficients;        // descending, sum of squares 1
  ComplexMatrix sample_vectors;   // M x r, columns u_i
  ComplexMatrix feature_vectors;  // F x r, columns phi_i
};

SchmidtData schmidt(const HybridPureState& state);

/// Rebuilds the amplitude matrix sum_i w_i u_i phi_i^T for arbitrary weights.
ComplexMatrix assemble(const SchmidtData& basis, const RealVector& weights);

/// Density-matrix exponentiation: n partial-swap steps exp(i S t/n) against
/// fresh copies of rho, acting on a target register. Channels are returned as
/// Liouville matrices acting on column-stacked vec(sigma).
struct DmeResult {
  ComplexMatrix channel;  // n-step DME channel
  ComplexMatrix target;   // sigma -> e^{i rho t} sigma e^{-i rho t}
  double error = 0.0;     // spectral norm of channel - target
  /// error * n / t^2; the first-order product formula keeps this bounded.
  double error_constant = 0.0;
};

/// Throws ContractError unless rho is Hermitian with unit trace and
/// eigenvalues >= -1e-10, or n_copies < 1.
DmeResult dme_approximate(const ComplexMatrix& rho, double t, int n_copies);

}  // namespace qkrr::dv
