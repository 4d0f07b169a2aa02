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

// Classical kernel ridge regression. Every quantum tier is checked against
// these predictions.

#include <span>
#include <string>
#include <vector>

#include "qkrr/dataset.hpp"
#include "qkrr/encoding.hpp"

namespace qkrr::krr {

/// M x M matrix of feature inner products K_ij = <phi(a_i), phi(a_j)>,
/// norms included. Encoder failures are rethrown naming the sample index.
RealMatrix gram(const Dataset& data, const encoding::FeatureEncoder& enc);

/// k_m = <phi(a_m), phi(a_new)> for every training sample.
RealVector kernel_vector(const Dataset& data, const encoding::FeatureEncoder& enc,
                         std::span<const double> a_new);

/// Encodes every sample, prefixing failures with the sample index.
std::vector<encoding::EncodedState> encode_all(const Dataset& data,
                                               const encoding::FeatureEncoder& enc);

struct FitOptions {
  /// With chi = 0 and a rank-deficient K, solve with a pseudo-inverse
  /// (cutoff 1e-10 * largest eigenvalue) instead of failing.
  bool allow_pseudo_inverse = false;
};

struct KrrModel {
  double chi = 0.0;
  RealVector dual_weights;  // (K + chi I)^{-1} y
  Dataset data;
  encoding::FeatureEncoder encoder;
  std::vector<encoding::EncodedState> states;
  std::vector<std::string> warnings;
};

/// Throws RegularizationRequired if chi = 0 and K has an eigenvalue
/// below 1e-10 (unless the pseudo-inverse fallback is enabled).
KrrModel fit(const Dataset& data, const encoding::FeatureEncoder& enc, double chi,
             FitOptions options = {});

/// sum_m beta_m k(a_m, a_new).
double predict(const KrrModel& model, std::span<const double> a_new);

enum class SpectralRoute {
  kAuto,      // explicit feature matrix when small enough, span basis otherwise
  kExplicit,  // SVD of the M x F feature matrix
  kSpan,      // eigendecomposition of K
};

/// sum_i lambda_i / (lambda_i^2 + chi) (u_i . y) <phi_i, phi(a_new)>, from the
/// singular value decomposition of the feature matrix A (K = A A^T).
double predict_svd(const Dataset& data, const encoding::FeatureEncoder& enc,
                   double chi, std::span<const double> a_new,
                   SpectralRoute route = SpectralRoute::kAuto);

/// True when the kAuto route would build the explicit feature matrix.
bool explicit_route_feasible(const Dataset& data, const encoding::FeatureEncoder& enc);

}  // namespace qkrr::krr
