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

#include "qkrr/dataset.hpp"

#include <cmath>
#include <string>

#include "qkrr/error.hpp"

namespace qkrr {

Dataset::Dataset(std::vector<Sample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw DataError("dataset is empty");
  }
  const std::size_t n = samples_.front().features.size();
  if (n == 0) {
    throw DataError("samples have no features");
  }
  for (std::size_t m = 0; m < samples_.size(); ++m) {
    const Sample& s = samples_[m];
    if (s.features.size() != n) {
      throw DataError("sample " + std::to_string(m) + " has " +
                      std::to_string(s.features.size()) + " features, expected " +
                      std::to_string(n));
    }
    for (double x : s.features) {
      if (!std::isfinite(x)) {
        throw DataError("sample " + std::to_string(m) + " has a non-finite feature");
      }
    }
    if (!std::isfinite(s.target)) {
      throw DataError("sample " + std::to_string(m) + " has a non-finite target");
    }
  }
}

RealVector Dataset::targets() const {
  RealVector y(static_cast<Eigen::Index>(samples_.size()));
  for (std::size_t m = 0; m < samples_.size(); ++m) {
    y(static_cast<Eigen::Index>(m)) = samples_[m].target;
  }
  return y;
}

Dataset Dataset::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != samples_.size()) {
    throw ContractError("permutation length does not match dataset size");
  }
  std::vector<Sample> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(samples_.at(i));
  return Dataset(std::move(out));
}

}  // namespace qkrr
