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

#include <vector>

#include "qkrr/dataset.hpp"
#include "qkrr/numerics.hpp"
#include "qkrr/random.hpp"

namespace qkrr::testing {

inline ComplexMatrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(rng.normal(), rng.normal());
  }
  return m;
}

inline ComplexMatrix random_hermitian(Rng& rng, Eigen::Index dim) {
  const ComplexMatrix a = random_matrix(rng, dim, dim);
  return 0.5 * (a + a.adjoint());
}

inline ComplexMatrix random_density(Rng& rng, Eigen::Index dim) {
  const ComplexMatrix a = random_matrix(rng, dim, dim);
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

/// M samples with N standard-normal features scaled by `scale`, targets
/// standard normal.
inline Dataset random_dataset(Rng& rng, std::size_t m, std::size_t n,
                              double scale = 1.0) {
  std::vector<Sample> samples(m);
  for (auto& s : samples) {
    s.features.resize(n);
    for (auto& x : s.features) x = scale * rng.normal();
    s.target = rng.normal();
  }
  return Dataset(std::move(samples));
}

inline std::vector<double> random_point(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> p(n);
  for (auto& x : p) x = scale * rng.normal();
  return p;
}

inline double relative_error(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

}  // namespace qkrr::testing
