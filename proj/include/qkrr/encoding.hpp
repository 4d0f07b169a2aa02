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

// Feature-map encoders: classical vectors to normalized quantum states plus
// the norm of the unnormalized feature vector, and the kernels they induce.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qkrr/numerics.hpp"

namespace qkrr::encoding {

/// Binary vector onto N qubits in the computational basis.
struct BasicQubit {};

/// a / |a| as amplitudes over N basis states.
struct Amplitude {};

/// d-fold tensor power of the amplitude state; kernel (a.b / |a||b|)^d.
struct PolyTensor {
  int degree = 2;
};

/// d-fold tensor power of (c, a_1..a_N) / sqrt(c^2 + |a|^2).
struct AffineAmplitude {
  double offset = 1.0;
  int degree = 2;
};

/// Product of truncated single-mode coherent states |a_i>, Fock numbers
/// 0..cutoff kept; kernel exp(-|a-b|^2 / 2).
struct Coherent {
  int cutoff = 16;
};

/// Product of Gaussian wavepackets exp(-(x-a_i)^2 / (2 width^2)) sampled on a
/// symmetric position grid; kernel exp(-|a-b|^2 / (4 width^2)).
struct PositionWavepacket {
  double width = 0.5;
  int grid_points = 128;
  double grid_extent = 8.0;
};

/// e^{i H(a) t} |0...0> for the open transverse-field Ising chain on N+1 qubits,
/// H(a) = sum_j a_j Z_j Z_{j+1} + field * sum_j X_j. The state is stored in
/// realified form (Re psi, Im psi), so overlaps are Re<psi_a|psi_b>.
struct Evolution {
  double field = 1.0;
  double time = 1.0;
};

using FeatureEncoder = std::variant<BasicQubit, Amplitude, PolyTensor,
                                    AffineAmplitude, Coherent,
                                    PositionWavepacket, Evolution>;

/// Throws ContractError when parameters violate their ranges.
void validate(const FeatureEncoder& enc);

/// Canonical text form, e.g. "poly:d=2" or "coherent:cutoff=16".
std::string describe(const FeatureEncoder& enc);

/// Parses the text form produced by describe(). Unspecified parameters take
/// their defaults. Throws ContractError on unknown names or keys.
FeatureEncoder parse_encoder(std::string_view text);

/// Size of the feature basis for N input features (saturates at SIZE_MAX).
std::size_t feature_dimension(const FeatureEncoder& enc, std::size_t n);

/// Encoded state as a tensor product of unit-norm factors.
struct EncodedState {
  std::vector<ComplexVector> factors;
  /// |phi(a)|, the norm of the unnormalized feature vector.
  double norm = 1.0;
  /// Probability weight discarded by Fock truncation (Coherent only).
  double tail_weight = 0.0;
  std::vector<std::string> warnings;

  std::size_t dimension() const;

  /// Full amplitude vector (Kronecker product of the factors, first factor
  /// slowest). Throws ContractError above 2^24 entries.
  ComplexVector amplitudes() const;
};

EncodedState encode(const FeatureEncoder& enc, std::span<const double> a);

/// <x|y> for two states with the same factor structure.
Complex overlap(const EncodedState& x, const EncodedState& y);

/// Closed-form kernel. Evolution and BasicQubit have none and fall back to
/// the real part of kernel_via_state.
double kernel(const FeatureEncoder& enc, std::span<const double> a,
              std::span<const double> b);

/// <psi_a|psi_b> |phi(a)| |phi(b)| from the encoded states.
Complex kernel_via_state(const FeatureEncoder& enc, std::span<const double> a,
                         std::span<const double> b);

/// Upper bound on |kernel_via_state - exp(-|a-b|^2/2)| for the Coherent
/// encoder, from the per-mode discarded tail weights.
double coherent_truncation_bound(const Coherent& enc, std::span<const double> a,
                                 std::span<const double> b);

/// Fock amplitudes of exp(x a^dag - x a)|0>, computed with a matrix
/// exponential in a space of `working_dimension` levels, then truncated to
/// cutoff+1 levels and renormalized.
ComplexVector coherent_state_by_displacement(double x, int cutoff,
                                             int working_dimension);

/// Ising-chain Hamiltonian used by the Evolution encoder.
ComplexMatrix ising_hamiltonian(std::span<const double> couplings, double field);

}  // namespace qkrr::encoding
