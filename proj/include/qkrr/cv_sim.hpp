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

// Two ancilla qumodes on a discretized phase space. The joint DV (x) CV state
// is kept block-diagonal in the Schmidt basis of the DV register: block i
// holds coefficient lambda_i and a two-mode wavefunction psi_i(x1, x2).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qkrr/numerics.hpp"

namespace qkrr::cv {

enum class Basis { kMomentum, kPosition };

/// G x G grid. Momenta p_j = (j - (G-1)/2) dp with dp = 2 L / (G - 1), so the
/// momentum grid spans [-L, L]. Positions use the conjugate spacing
/// dq = 2 pi / (G dp); the position origin is a grid point only for odd G.
class QumodeGrid {
 public:
  /// Throws ContractError unless points >= 64 and momentum_extent > 0.
  QumodeGrid(std::size_t points, double momentum_extent);

  /// Grid for the resource state of width s carrying phases up to
  /// e^{i alpha_max p1 p2}: momentum extent 7 s and enough points that the
  /// position grid covers 7 standard deviations of the widest position
  /// density. G is odd (origin on the grid), 7-smooth and >= min_points.
  static QumodeGrid for_resource(double s, double alpha_max, std::size_t min_points = 513);

  std::size_t points() const { return points_; }
  double momentum_extent() const { return extent_; }
  double momentum_spacing() const { return dp_; }
  double position_spacing() const { return dq_; }
  /// Coordinate of the outermost position grid point.
  double position_extent() const { return 0.5 * static_cast<double>(points_ - 1) * dq_; }

  double momentum(std::size_t j) const { return offset(j) * dp_; }
  double position(std::size_t j) const { return offset(j) * dq_; }

  /// Grid index whose position is q (to within 1e-9 dq).
  std::optional<std::size_t> position_index(double q) const;

  /// Largest |theta| with e^{i theta p1 p2} alias-free: |theta| L dp <= pi (G-1)/G.
  double max_resolved_phase() const;

 private:
  double offset(std::size_t j) const {
    return static_cast<double>(j) - 0.5 * static_cast<double>(points_ - 1);
  }

  std::size_t points_;
  double extent_;
  double dp_;
  double dq_;
};

/// Row-major G x G samples, values[i1 * G + i2] = psi(x1_{i1}, x2_{i2}).
struct TwoModeWavefunction {
  QumodeGrid grid;
  Basis basis = Basis::kMomentum;
  std::vector<Complex> values;

  Complex at(std::size_t i1, std::size_t i2) const { return values[i1 * grid.points() + i2]; }
  /// sum |psi|^2 dx^2 with the spacing of the current basis.
  double norm2() const;
};

/// Discretized resource state with momentum amplitude
/// e^{-(p1^2 + p2^2) / 2 s^2}, normalized on the grid. Throws ContractError
/// when the grid extent is below 5 s or the spacing exceeds s / 8.
TwoModeWavefunction prepare_G12(const QumodeGrid& grid, double s);

struct Block {
  double coefficient = 0.0;
  TwoModeWavefunction wavefunction;
};

struct JointState {
  std::vector<Block> blocks;

  Basis basis() const;
  /// sum_i coefficient_i^2 * norm2(psi_i).
  double norm2() const;
};

/// Blocks coefficient_i (x) resource.
JointState make_joint_state(const RealVector& coefficients, const TwoModeWavefunction& resource);

/// Multiplies block i by e^{i eta kappa_i p1 p2}. Throws ContractError in the
/// position basis or on a size mismatch, NumericalError when the phase is not
/// resolved by the grid.
JointState conditional_phase(JointState joint, double eta, const RealVector& kappa);

/// Multiplies every block by e^{i eta chi p1 p2}; chi is in the same units as
/// the kappa passed to conditional_phase.
JointState regularization_gate(JointState joint, double eta, double chi);

/// Centered 2D transform of every block to the position basis.
JointState to_position(JointState joint);

struct HomodyneOutcome {
  double q1 = 0.0;
  double q2 = 0.0;
  std::size_t i1 = 0;
  std::size_t i2 = 0;
};

/// Draws position outcomes from the cell probabilities
/// sum_i lambda_i^2 |psi_i(q1, q2)|^2 dq^2 by inverse CDF. Deterministic in
/// the seed; the k-th outcome of a call with count n equals the k-th outcome
/// of any call with a larger count. Throws NumericalError if the density
/// vanishes everywhere, ContractError in the momentum basis.
std::vector<HomodyneOutcome> homodyne_sample(const JointState& joint, std::uint64_t seed,
                                             std::size_t count = 1);

struct Postselection {
  ComplexVector dv_weights;     // lambda_i psi_i(Q1, Q2)
  double success_density = 0.0;  // sum_i |dv_weights_i|^2
};

/// Throws ContractError in the momentum basis or when (q1, q2) is not a grid
/// point.
Postselection postselect(const JointState& joint, double q1, double q2);

/// Position wavefunction of e^{i alpha p1 p2} |G12> for the unit-normalized
/// resource of width s:
///   (pi s^2 det)^{-1/2} exp(-(q1^2 + q2^2) / (2 s^2 det) - i alpha q1 q2 / det),
/// det = s^-4 + alpha^2.
Complex analytic_B(double alpha, double s, double q1, double q2);

/// Same joint state as make_joint_state + phases, stored as one accumulated
/// phase theta_i per block instead of G^2 samples. Position amplitudes are
/// the exact discrete transform of the momentum samples, evaluated one point
/// at a time in O(G^2), so grids far beyond memory limits stay usable.
class PhaseBlockState {
 public:
  PhaseBlockState(QumodeGrid grid, double s, RealVector coefficients);

  void apply_conditional_phase(double eta, const RealVector& kappa);
  void apply_regularization(double eta, double chi);

  const QumodeGrid& grid() const { return grid_; }
  const RealVector& coefficients() const { return coefficients_; }
  const RealVector& phases() const { return phases_; }

  /// psi_i at position grid point (i1, i2).
  Complex position_amplitude(std::size_t block, std::size_t i1, std::size_t i2) const;

  Postselection postselect(double q1, double q2) const;

  /// Momentum-basis JointState with the same content.
  JointState materialize() const;

 private:
  void check_phase(double theta) const;

  QumodeGrid grid_;
  std::vector<double> profile_;  // normalized 1D momentum amplitudes
  RealVector coefficients_;
  RealVector phases_;
};

}  // namespace qkrr::cv
