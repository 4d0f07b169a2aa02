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

#include <cstddef>
#include <vector>

#include "qkrr/numerics.hpp"

namespace qkrr {

struct Sample {
  std::vector<double> features;
  double target = 0.0;
};

/// Training set of M samples sharing a feature dimension N >= 1.
/// Construction validates shape and finiteness (throws DataError).
class Dataset {
 public:
  explicit Dataset(std::vector<Sample> samples);

  std::size_t size() const { return samples_.size(); }
  std::size_t dimension() const { return samples_.front().features.size(); }
  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  RealVector targets() const;

  /// Dataset with samples reordered as samples[order[0]], samples[order[1]], ...
  Dataset permuted(const std::vector<std::size_t>& order) const;

 private:
  std::vector<Sample> samples_;
};

}  // namespace qkrr
