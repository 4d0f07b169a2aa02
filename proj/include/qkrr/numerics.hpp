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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qkrr {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

namespace numerics {

/// Thin singular value decomposition m = U diag(s) V^H.
///
/// Singular values are sorted descending. Each left vector is rotated so its
/// first component with magnitude above 1e-12 is real and positive; the
/// matching right vector receives the same phase so the product is unchanged.
struct SvdResult {
  RealVector singular_values;
  ComplexMatrix left_vectors;   // rows x r
  ComplexMatrix right_vectors;  // cols x r
};

SvdResult svd(const ComplexMatrix& m);

/// exp(scale * h) for square h.
ComplexMatrix matrix_exponential(const ComplexMatrix& h, Complex scale);

/// Kronecker product a (x) b; index of a is the slow one.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Traces out every subsystem except `keep`. `dims` lists subsystem
/// dimensions with the first entry the slowest-varying index.
ComplexMatrix partial_trace(const ComplexMatrix& rho,
                            std::span<const std::size_t> dims,
                            std::size_t keep);

bool all_finite(const ComplexMatrix& m);

/// Largest singular value.
double spectral_norm(const ComplexMatrix& m);

enum class Direction {
  kMomentumToPosition,  // psi(q) = (2 pi)^-1 sum_p e^{+i p.q} psi(p) dp^2
  kPositionToMomentum,  // psi(p) = (2 pi)^-1 sum_q e^{-i p.q} psi(q) dq^2
};

/// Centered two-dimensional transform of a row-major G x G array.
///
/// Both grids are symmetric about zero: x_j = (j - (G-1)/2) * spacing. The
/// conjugate grid has spacing 2 pi / (G * spacing), which makes the transform
/// unitary with respect to the sum |psi|^2 spacing^2. Applying the opposite
/// direction with the conjugate spacing inverts it.
std::vector<Complex> fft2_centered(std::span<const Complex> values,
                                   std::size_t points_per_axis,
                                   double spacing, Direction direction);

/// Spacing of the grid conjugate to one with `spacing` and `points` points.
double conjugate_spacing(std::size_t points, double spacing);

}  // namespace numerics
}  // namespace qkrr
