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

#include "qkrr/cv_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qkrr/error.hpp"
#include "qkrr/parallel.hpp"
#include "qkrr/random.hpp"

namespace qkrr::cv {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kResourceSigmas = 7.0;
constexpr std::size_t kReanchorInterval = 64;
constexpr std::size_t kMaxGridPoints = std::size_t{1} << 18;

bool seven_smooth(std::size_t n) {
  for (std::size_t p : {2u, 3u, 5u, 7u}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

std::vector<double> gaussian_profile(const QumodeGrid& grid, double s) {
  const std::size_t g = grid.points();
  std::vector<double> profile(g);
  double sum = 0.0;
  for (std::size_t j = 0; j < g; ++j) {
    const double p = grid.momentum(j) / s;
    profile[j] = std::exp(-0.5 * p * p);
    sum += profile[j] * profile[j];
  }
  const double scale = 1.0 / std::sqrt(sum * grid.momentum_spacing());
  for (auto& v : profile) v *= scale;
  return profile;
}

void require_resolved_width(const QumodeGrid& grid, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ContractError("squeezing s must be positive and finite");
  }
  if (grid.momentum_extent() < 5.0 * s) {
    std::ostringstream msg;
    msg << "grid momentum extent " << grid.momentum_extent()
        << " is too small for s = " << s << "; needs at least " << 5.0 * s;
    throw ContractError(msg.str());
  }
  if (grid.momentum_spacing() > s / 8.0) {
    std::ostringstream msg;
    msg << "grid spacing " << grid.momentum_spacing() << " is too coarse for s = " << s
        << "; needs at most " << s / 8.0 << " (8 points per width)";
    throw ContractError(msg.str());
  }
}

void require_resolved_phase(const QumodeGrid& grid, double theta) {
  if (!std::isfinite(theta)) {
    throw ContractError("phase coefficient must be finite");
  }
  if (std::abs(theta) > grid.max_resolved_phase()) {
    const double l = grid.momentum_extent();
    std::ostringstream msg;
    msg << "phase e^{i " << theta << " p1 p2} aliases on a " << grid.points()
        << "-point grid with extent " << l << "; needs about "
        << static_cast<std::size_t>(std::ceil(2.0 * std::abs(theta) * l * l / kPi)) + 2
        << " points";
    throw NumericalError(msg.str());
  }
}

void require_basis(const JointState& joint, Basis basis, const char* op) {
  if (joint.blocks.empty()) {
    throw ContractError(std::string(op) + ": joint state has no blocks");
  }
  if (joint.basis() != basis) {
    throw ContractError(std::string(op) + (basis == Basis::kMomentum
                                               ? ": requires the momentum basis"
                                               : ": requires the position basis"));
  }
}

void multiply_phase(TwoModeWavefunction& w, double theta) {
  const QumodeGrid& grid = w.grid;
  const std::size_t g = grid.points();
  for (std::size_t i1 = 0; i1 < g; ++i1) {
    const double p1 = grid.momentum(i1);
    for (std::size_t i2 = 0; i2 < g; ++i2) {
      w.values[i1 * g + i2] *= std::polar(1.0, theta * p1 * grid.momentum(i2));
    }
  }
}

std::pair<std::size_t, std::size_t> grid_point(const QumodeGrid& grid, double q1, double q2) {
  const auto i1 = grid.position_index(q1);
  const auto i2 = grid.position_index(q2);
  if (!i1 || !i2) {
    std::ostringstream msg;
    msg << "postselect: (" << q1 << ", " << q2 << ") is not a position grid point"
        << " (spacing " << grid.position_spacing() << ")";
    throw ContractError(msg.str());
  }
  return {*i1, *i2};
}

}  // namespace

QumodeGrid::QumodeGrid(std::size_t points, double momentum_extent)
    : points_(points), extent_(momentum_extent) {
  if (points < 64) {
    throw ContractError("qumode grid needs at least 64 points per axis");
  }
  if (!(momentum_extent > 0.0) || !std::isfinite(momentum_extent)) {
    throw ContractError("qumode grid extent must be positive and finite");
  }
  dp_ = 2.0 * extent_ / static_cast<double>(points_ - 1);
  dq_ = numerics::conjugate_spacing(points_, dp_);
}

QumodeGrid QumodeGrid::for_resource(double s, double alpha_max, std::size_t min_points) {
  if (!(s > 0.0) || !std::isfinite(s) || !std::isfinite(alpha_max)) {
    throw ContractError("for_resource: s must be positive and alpha finite");
  }
  const double alpha = std::abs(alpha_max);
  const double extent = kResourceSigmas * s;
  const double position_width = std::sqrt(1.0 + alpha * alpha * s * s * s * s) / s;
  const double needed = kResourceSigmas * position_width;
  std::size_t g = std::max<std::size_t>(min_points, 65);
  for (;; ++g) {
    if (g > kMaxGridPoints) {
      std::ostringstream msg;
      msg << "no grid up to " << kMaxGridPoints << " points resolves s = " << s
          << " with alpha = " << alpha;
      throw NumericalError(msg.str());
    }
    if (g % 2 == 0 || !seven_smooth(g)) continue;
    const QumodeGrid grid(g, extent);
    if (grid.position_extent() >= needed && grid.max_resolved_phase() >= alpha &&
        grid.momentum_spacing() <= s / 8.0) {
      return grid;
    }
  }
}

std::optional<std::size_t> QumodeGrid::position_index(double q) const {
  const double x = q / dq_ + 0.5 * static_cast<double>(points_ - 1);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) > 1e-9 || nearest < 0.0 ||
      nearest > static_cast<double>(points_ - 1)) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(nearest);
}

double QumodeGrid::max_resolved_phase() const {
  return kPi * static_cast<double>(points_ - 1) / static_cast<double>(points_) /
         (extent_ * dp_);
}

double TwoModeWavefunction::norm2() const {
  double s = 0.0;
  for (const auto& v : values) s += std::norm(v);
  const double h =
      basis == Basis::kMomentum ? grid.momentum_spacing() : grid.position_spacing();
  return s * h * h;
}

TwoModeWavefunction prepare_G12(const QumodeGrid& grid, double s) {
  require_resolved_width(grid, s);
  const auto profile = gaussian_profile(grid, s);
  const std::size_t g = grid.points();
  TwoModeWavefunction w{grid, Basis::kMomentum, std::vector<Complex>(g * g)};
  for (std::size_t i1 = 0; i1 < g; ++i1) {
    for (std::size_t i2 = 0; i2 < g; ++i2) {
      w.values[i1 * g + i2] = profile[i1] * profile[i2];
    }
  }
  return w;
}

Basis JointState::basis() const {
  return blocks.empty() ? Basis::kMomentum : blocks.front().wavefunction.basis;
}

double JointState::norm2() const {
  double s = 0.0;
  for (const auto& b : blocks) s += b.coefficient * b.coefficient * b.wavefunction.norm2();
  return s;
}

JointState make_joint_state(const RealVector& coefficients,
                            const TwoModeWavefunction& resource) {
  JointState joint;
  joint.blocks.reserve(static_cast<std::size_t>(coefficients.size()));
  for (Eigen::Index i = 0; i < coefficients.size(); ++i) {
    joint.blocks.push_back({coefficients(i), resource});
  }
  return joint;
}

JointState conditional_phase(JointState joint, double eta, const RealVector& kappa) {
  require_basis(joint, Basis::kMomentum, "conditional_phase");
  if (static_cast<std::size_t>(kappa.size()) != joint.blocks.size()) {
    throw ContractError("conditional_phase: one eigenvalue per block required");
  }
  for (std::size_t i = 0; i < joint.blocks.size(); ++i) {
    require_resolved_phase(joint.blocks[i].wavefunction.grid,
                           eta * kappa(static_cast<Eigen::Index>(i)));
  }
  parallel_for(joint.blocks.size(), [&](std::size_t i) {
    const double theta = eta * kappa(static_cast<Eigen::Index>(i));
    if (theta != 0.0) multiply_phase(joint.blocks[i].wavefunction, theta);
  });
  return joint;
}

JointState regularization_gate(JointState joint, double eta, double chi) {
  require_basis(joint, Basis::kMomentum, "regularization_gate");
  const double theta = eta * chi;
  require_resolved_phase(joint.blocks.front().wavefunction.grid, theta);
  if (theta == 0.0) return joint;
  parallel_for(joint.blocks.size(),
               [&](std::size_t i) { multiply_phase(joint.blocks[i].wavefunction, theta); });
  return joint;
}

JointState to_position(JointState joint) {
  require_basis(joint, Basis::kMomentum, "to_position");
  parallel_for(joint.blocks.size(), [&](std::size_t i) {
    auto& w = joint.blocks[i].wavefunction;
    w.values = numerics::fft2_centered(w.values, w.grid.points(), w.grid.momentum_spacing(),
                                       numerics::Direction::kMomentumToPosition);
    w.basis = Basis::kPosition;
  });
  return joint;
}

std::vector<HomodyneOutcome> homodyne_sample(const JointState& joint, std::uint64_t seed,
                                             std::size_t count) {
  require_basis(joint, Basis::kPosition, "homodyne_sample");
  const QumodeGrid& grid = joint.blocks.front().wavefunction.grid;
  const std::size_t g = grid.points();
  std::vector<double> cdf(g * g, 0.0);
  for (const auto& b : joint.blocks) {
    const double w = b.coefficient * b.coefficient;
    for (std::size_t k = 0; k < cdf.size(); ++k) cdf[k] += w * std::norm(b.wavefunction.values[k]);
  }
  std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
  const double total = cdf.back();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("homodyne_sample: measurement density vanishes on the grid");
  }
  Rng rng(seed);
  std::vector<HomodyneOutcome> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto k = static_cast<std::size_t>(it - cdf.begin());
    const std::size_t i1 = k / g;
    const std::size_t i2 = k % g;
    out.push_back({grid.position(i1), grid.position(i2), i1, i2});
  }
  return out;
}

Postselection postselect(const JointState& joint, double q1, double q2) {
  require_basis(joint, Basis::kPosition, "postselect");
  const auto [i1, i2] = grid_point(joint.blocks.front().wavefunction.grid, q1, q2);
  Postselection out;
  out.dv_weights.resize(static_cast<Eigen::Index>(joint.blocks.size()));
  for (std::size_t i = 0; i < joint.blocks.size(); ++i) {
    const auto& b = joint.blocks[i];
    out.dv_weights(static_cast<Eigen::Index>(i)) = b.coefficient * b.wavefunction.at(i1, i2);
  }
  out.success_density = out.dv_weights.squaredNorm();
  return out;
}

Complex analytic_B(double alpha, double s, double q1, double q2) {
  const double s2 = s * s;
  const double det = 1.0 / (s2 * s2) + alpha * alpha;
  const double magnitude = 1.0 / std::sqrt(kPi * s2 * det);
  return magnitude * std::exp(Complex(-(q1 * q1 + q2 * q2) / (2.0 * s2 * det),
                                      -alpha * q1 * q2 / det));
}

PhaseBlockState::PhaseBlockState(QumodeGrid grid, double s, RealVector coefficients)
    : grid_(grid),
      coefficients_(std::move(coefficients)),
      phases_(RealVector::Zero(coefficients_.size())) {
  require_resolved_width(grid_, s);
  if (coefficients_.size() == 0) {
    throw ContractError("PhaseBlockState: no blocks");
  }
  profile_ = gaussian_profile(grid_, s);
}

void PhaseBlockState::check_phase(double theta) const { require_resolved_phase(grid_, theta); }

void PhaseBlockState::apply_conditional_phase(double eta, const RealVector& kappa) {
  if (kappa.size() != coefficients_.size()) {
    throw ContractError("conditional_phase: one eigenvalue per block required");
  }
  const RealVector updated = phases_ + eta * kappa;
  for (Eigen::Index i = 0; i < updated.size(); ++i) check_phase(updated(i));
  phases_ = updated;
}

void PhaseBlockState::apply_regularization(double eta, double chi) {
  const RealVector updated = phases_.array() + eta * chi;
  for (Eigen::Index i = 0; i < updated.size(); ++i) check_phase(updated(i));
  phases_ = updated;
}

Complex PhaseBlockState::position_amplitude(std::size_t block, std::size_t i1,
                                            std::size_t i2) const {
  const double theta = phases_(static_cast<Eigen::Index>(block));
  const std::size_t g = grid_.points();
  const double dp = grid_.momentum_spacing();
  const double q1 = grid_.position(i1);
  const double q2 = grid_.position(i2);
  const std::size_t half = g / 2;

  Complex total = 0.0;
  for (std::size_t j1 = 0; j1 < g; ++j1) {
    const double p1 = grid_.momentum(j1);
    const double x = q2 + theta * p1;
    // The profile is even, so sum_j2 g_j2 e^{i p_j2 x} = sum_j2 g_j2 cos(p_j2 x).
    const Complex step = std::polar(1.0, dp * x);
    Complex z;
    double inner = g % 2 == 1 ? profile_[half] : 0.0;
    for (std::size_t j2 = 0; j2 < half; ++j2) {
      if (j2 % kReanchorInterval == 0) {
        z = std::polar(1.0, grid_.momentum(j2) * x);
      } else {
        z *= step;
      }
      inner += 2.0 * profile_[j2] * z.real();
    }
    total += profile_[j1] * inner * std::polar(1.0, p1 * q1);
  }
  return total * (dp * dp / (2.0 * kPi));
}

Postselection PhaseBlockState::postselect(double q1, double q2) const {
  const auto [i1, i2] = grid_point(grid_, q1, q2);
  Postselection out;
  out.dv_weights.resize(coefficients_.size());
  parallel_for(static_cast<std::size_t>(coefficients_.size()), [&](std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    out.dv_weights(k) = coefficients_(k) * position_amplitude(i, i1, i2);
  });
  out.success_density = out.dv_weights.squaredNorm();
  return out;
}

JointState PhaseBlockState::materialize() const {
  const std::size_t g = grid_.points();
  TwoModeWavefunction resource{grid_, Basis::kMomentum, std::vector<Complex>(g * g)};
  for (std::size_t i1 = 0; i1 < g; ++i1) {
    for (std::size_t i2 = 0; i2 < g; ++i2) {
      resource.values[i1 * g + i2] = profile_[i1] * profile_[i2];
    }
  }
  JointState joint = make_joint_state(coefficients_, resource);
  parallel_for(joint.blocks.size(), [&](std::size_t i) {
    const double theta = phases_(static_cast<Eigen::Index>(i));
    if (theta != 0.0) multiply_phase(joint.blocks[i].wavefunction, theta);
  });
  return joint;
}

}  // namespace qkrr::cv
