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

#include "qkrr/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fftw3.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "qkrr/error.hpp"

namespace qkrr::numerics {
namespace {

std::string dims_string(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream out;
  out << rows << "x" << cols;
  return out.str();
}

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// e^{i pi * numerator / denominator} with the numerator reduced exactly in
// integers so large arguments do not lose precision.
Complex exact_phase(std::int64_t numerator, std::int64_t denominator) {
  const std::int64_t period = 2 * denominator;
  std::int64_t r = numerator % period;
  if (r < 0) r += period;
  const double angle = std::numbers::pi * static_cast<double>(r) /
                       static_cast<double>(denominator);
  return std::polar(1.0, angle);
}

}  // namespace

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
        return false;
      }
    }
  }
  return true;
}

SvdResult svd(const ComplexMatrix& m) {
  if (m.size() == 0) {
    throw ContractError("svd: empty matrix");
  }
  if (!all_finite(m)) {
    throw ContractError("svd: non-finite entries in " +
                        dims_string(m.rows(), m.cols()) + " matrix");
  }
  Eigen::JacobiSVD<ComplexMatrix> solver(m,
                                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("svd: no convergence for " +
                         dims_string(m.rows(), m.cols()) + " matrix");
  }
  SvdResult result{solver.singularValues(), solver.matrixU(), solver.matrixV()};

  for (Eigen::Index k = 0; k < result.left_vectors.cols(); ++k) {
    for (Eigen::Index i = 0; i < result.left_vectors.rows(); ++i) {
      const Complex c = result.left_vectors(i, k);
      if (std::abs(c) > 1e-12) {
        const Complex phase = std::conj(c) / std::abs(c);
        result.left_vectors.col(k) *= phase;
        result.right_vectors.col(k) *= phase;
        break;
      }
    }
  }
  return result;
}

ComplexMatrix matrix_exponential(const ComplexMatrix& h, Complex scale) {
  if (h.rows() != h.cols()) {
    throw ContractError("matrix_exponential: non-square " +
                        dims_string(h.rows(), h.cols()) + " matrix");
  }
  const ComplexMatrix scaled = scale * h;
  ComplexMatrix result = scaled.exp();
  if (!all_finite(result)) {
    throw NumericalError("matrix_exponential: overflow for " +
                         dims_string(h.rows(), h.cols()) + " matrix");
  }
  return result;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho,
                            std::span<const std::size_t> dims,
                            std::size_t keep) {
  if (keep >= dims.size()) {
    throw ContractError("partial_trace: kept subsystem out of range");
  }
  const std::size_t total = std::accumulate(dims.begin(), dims.end(),
                                            std::size_t{1}, std::multiplies<>());
  if (rho.rows() != rho.cols() ||
      static_cast<std::size_t>(rho.rows()) != total) {
    throw ContractError("partial_trace: " + dims_string(rho.rows(), rho.cols()) +
                        " matrix does not match subsystem dimensions");
  }
  const std::size_t before = std::accumulate(
      dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(keep),
      std::size_t{1}, std::multiplies<>());
  const std::size_t kept = dims[keep];
  const std::size_t after = total / (before * kept);

  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(kept),
                                          static_cast<Eigen::Index>(kept));
  for (std::size_t i = 0; i < kept; ++i) {
    for (std::size_t j = 0; j < kept; ++j) {
      Complex sum = 0.0;
      for (std::size_t b = 0; b < before; ++b) {
        for (std::size_t a = 0; a < after; ++a) {
          const auto row = static_cast<Eigen::Index>((b * kept + i) * after + a);
          const auto col = static_cast<Eigen::Index>((b * kept + j) * after + a);
          sum += rho(row, col);
        }
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum;
    }
  }
  return out;
}

double spectral_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> solver(m);
  return solver.singularValues()(0);
}

double conjugate_spacing(std::size_t points, double spacing) {
  return 2.0 * std::numbers::pi / (static_cast<double>(points) * spacing);
}

std::vector<Complex> fft2_centered(std::span<const Complex> values,
                                   std::size_t points_per_axis, double spacing,
                                   Direction direction) {
  const std::size_t n = points_per_axis;
  if (n < 2 || values.size() != n * n) {
    throw ContractError("fft2_centered: array is not G x G");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw ContractError("fft2_centered: spacing must be positive");
  }

  // With c = (G-1)/2, x_j y_k = (2 pi / G)(jk - cj - ck + c^2), so the centered
  // kernel is a plain DFT sandwiched between diagonal phases.
  const auto g = static_cast<std::int64_t>(n);
  const double sign = direction == Direction::kMomentumToPosition ? 1.0 : -1.0;
  std::vector<Complex> pre(n);
  std::vector<Complex> post(n);
  const Complex offset = exact_phase((g - 1) * (g - 1), 2 * g);  // e^{2 pi i c^2/G}
  const double scale = spacing / std::sqrt(2.0 * std::numbers::pi);
  for (std::int64_t j = 0; j < g; ++j) {
    Complex p = exact_phase(-(g - 1) * j, g);  // e^{-2 pi i c j / G}
    Complex q = p * offset;
    if (sign < 0) {
      p = std::conj(p);
      q = std::conj(q);
    }
    pre[static_cast<std::size_t>(j)] = p;
    post[static_cast<std::size_t>(j)] = q * scale;
  }

  std::vector<Complex> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[i * n + j] = values[i * n + j] * pre[i] * pre[j];
    }
  }

  auto* data = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), data, data,
                            sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD,
                            FFTW_ESTIMATE);
  }
  if (plan == nullptr) {
    throw NumericalError("fft2_centered: FFTW planning failed");
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[i * n + j] *= post[i] * post[j];
    }
  }
  return out;
}

}  // namespace qkrr::numerics
