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

#include "qkrr/encoding.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "qkrr/error.hpp"

namespace qkrr::encoding {
namespace {

constexpr std::size_t kMaxMaterialized = std::size_t{1} << 24;
constexpr int kMaxEvolutionQubits = 6;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

double squared_norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_finite(std::span<const double> a) {
  for (double x : a) {
    if (!std::isfinite(x)) throw DataError("non-finite feature value");
  }
}

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractError("kernel: feature vectors have lengths " +
                        std::to_string(a.size()) + " and " +
                        std::to_string(b.size()));
  }
}

std::size_t saturating_pow(std::size_t base, std::size_t exponent) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (base != 0 && out > std::numeric_limits<std::size_t>::max() / base) {
      return std::numeric_limits<std::size_t>::max();
    }
    out *= base;
  }
  return out;
}

ComplexVector real_vector(std::span<const double> values, double scale) {
  ComplexVector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = values[i] * scale;
  }
  return v;
}

// Fock amplitudes e^{-x^2/2} x^n / sqrt(n!) for n = 0..cutoff, and the weight
// beyond the cutoff.
ComplexVector coherent_fock(double x, int cutoff, double& tail) {
  ComplexVector v(cutoff + 1);
  double c = std::exp(-0.5 * x * x);
  double kept = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    if (n > 0) c *= x / std::sqrt(static_cast<double>(n));
    v(n) = c;
    kept += c * c;
  }
  tail = std::max(0.0, 1.0 - kept);
  v /= std::sqrt(kept);
  return v;
}

ComplexVector wavepacket(double center, const PositionWavepacket& enc) {
  if (std::abs(center) + 6.0 * enc.width > enc.grid_extent) {
    throw DataError("wavepacket centered at " + format_double(center) +
                    " does not fit the position grid [-" +
                    format_double(enc.grid_extent) + ", " +
                    format_double(enc.grid_extent) + "] (needs |a| + 6 width <= extent)");
  }
  const int p = enc.grid_points;
  const double h = 2.0 * enc.grid_extent / (p - 1);
  ComplexVector v(p);
  for (int j = 0; j < p; ++j) {
    const double x = -enc.grid_extent + j * h;
    const double d = (x - center) / enc.width;
    v(j) = std::exp(-0.5 * d * d);
  }
  v /= v.norm();
  return v;
}

EncodedState encode_amplitude(std::span<const double> a, int degree) {
  const double norm = std::sqrt(squared_norm(a));
  if (!(norm > 0.0)) {
    throw DataError("amplitude encoding of a zero vector");
  }
  EncodedState s;
  const ComplexVector f = real_vector(a, 1.0 / norm);
  s.factors.assign(static_cast<std::size_t>(degree), f);
  s.norm = std::pow(norm, degree);
  return s;
}

EncodedState encode_affine(std::span<const double> a, const AffineAmplitude& enc) {
  const double c2 = enc.offset * enc.offset;
  const double total = c2 + squared_norm(a);
  if (!(total > 0.0)) {
    throw DataError("affine encoding of a zero vector with zero offset");
  }
  const double inv = 1.0 / std::sqrt(total);
  ComplexVector f(static_cast<Eigen::Index>(a.size() + 1));
  f(0) = enc.offset * inv;
  for (std::size_t i = 0; i < a.size(); ++i) {
    f(static_cast<Eigen::Index>(i + 1)) = a[i] * inv;
  }
  EncodedState s;
  s.factors.assign(static_cast<std::size_t>(enc.degree), f);
  s.norm = std::pow(total, 0.5 * enc.degree);
  return s;
}

EncodedState encode_coherent(std::span<const double> a, const Coherent& enc) {
  EncodedState s;
  double kept = 1.0;
  for (double x : a) {
    double tail = 0.0;
    s.factors.push_back(coherent_fock(x, enc.cutoff, tail));
    kept *= 1.0 - tail;
  }
  s.tail_weight = 1.0 - kept;
  if (s.tail_weight > 1e-6) {
    std::ostringstream msg;
    msg << "coherent truncation at cutoff " << enc.cutoff << " discards weight "
        << s.tail_weight;
    s.warnings.push_back(msg.str());
  }
  return s;
}

EncodedState encode_basic(std::span<const double> a) {
  EncodedState s;
  for (double x : a) {
    if (x != 0.0 && x != 1.0) {
      throw DataError("basic qubit encoding requires binary features, got " +
                      format_double(x));
    }
    ComplexVector f = ComplexVector::Zero(2);
    f(x == 1.0 ? 1 : 0) = 1.0;
    s.factors.push_back(f);
  }
  return s;
}

EncodedState encode_evolution(std::span<const double> a, const Evolution& enc) {
  const ComplexMatrix h = ising_hamiltonian(a, enc.field);
  const ComplexMatrix u =
      numerics::matrix_exponential(h, Complex(0.0, enc.time));
  const Eigen::Index dim = u.rows();
  ComplexVector f(2 * dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    f(i) = u(i, 0).real();
    f(dim + i) = u(i, 0).imag();
  }
  f /= f.norm();
  EncodedState s;
  s.factors.push_back(f);
  return s;
}

}  // namespace

void validate(const FeatureEncoder& enc) {
  std::visit(
      Overloaded{
          [](const BasicQubit&) {},
          [](const Amplitude&) {},
          [](const PolyTensor& e) {
            if (e.degree < 1) throw ContractError("poly: degree must be >= 1");
          },
          [](const AffineAmplitude& e) {
            if (e.degree < 1) throw ContractError("affine: degree must be >= 1");
            if (!std::isfinite(e.offset)) {
              throw ContractError("affine: offset must be finite");
            }
          },
          [](const Coherent& e) {
            if (e.cutoff < 2) throw ContractError("coherent: cutoff must be >= 2");
          },
          [](const PositionWavepacket& e) {
            if (!(e.width > 0.0)) {
              throw ContractError("wavepacket: width must be positive");
            }
            if (e.grid_points < 16 || !(e.grid_extent > 0.0)) {
              throw ContractError("wavepacket: grid needs >= 16 points and a positive extent");
            }
            const double h = 2.0 * e.grid_extent / (e.grid_points - 1);
            if (h > 0.5 * e.width) {
              throw ContractError("wavepacket: grid spacing " + format_double(h) +
                                  " exceeds width/2; add points or widen packets");
            }
          },
          [](const Evolution& e) {
            if (!std::isfinite(e.field) || !std::isfinite(e.time)) {
              throw ContractError("evolution: field and time must be finite");
            }
          },
      },
      enc);
}

std::string describe(const FeatureEncoder& enc) {
  return std::visit(
      Overloaded{
          [](const BasicQubit&) -> std::string { return "basic"; },
          [](const Amplitude&) -> std::string { return "amplitude"; },
          [](const PolyTensor& e) -> std::string {
            return "poly:d=" + std::to_string(e.degree);
          },
          [](const AffineAmplitude& e) -> std::string {
            return "affine:c=" + format_double(e.offset) +
                   ",d=" + std::to_string(e.degree);
          },
          [](const Coherent& e) -> std::string {
            return "coherent:cutoff=" + std::to_string(e.cutoff);
          },
          [](const PositionWavepacket& e) -> std::string {
            return "wavepacket:sigma=" + format_double(e.width) +
                   ",points=" + std::to_string(e.grid_points) +
                   ",extent=" + format_double(e.grid_extent);
          },
          [](const Evolution& e) -> std::string {
            return "evolution:field=" + format_double(e.field) +
                   ",t0=" + format_double(e.time);
          },
      },
      enc);
}

FeatureEncoder parse_encoder(std::string_view text) {
  const auto colon = text.find(':');
  const std::string name(text.substr(0, colon));
  std::map<std::string, std::string> params;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw ContractError("encoder parameter '" + std::string(item) +
                            "' is not key=value");
      }
      params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }

  auto take_double = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    double value = 0.0;
    const std::string& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ContractError("encoder parameter " + key + "='" + s + "' is not a number");
    }
    params.erase(it);
    return value;
  };
  auto take_int = [&](const std::string& key, int fallback) {
    const double v = take_double(key, fallback);
    if (v != std::floor(v)) {
      throw ContractError("encoder parameter " + key + " must be an integer");
    }
    return static_cast<int>(v);
  };

  FeatureEncoder enc;
  if (name == "basic") {
    enc = BasicQubit{};
  } else if (name == "amplitude") {
    enc = Amplitude{};
  } else if (name == "poly") {
    enc = PolyTensor{take_int("d", 2)};
  } else if (name == "affine") {
    AffineAmplitude e;
    e.offset = take_double("c", e.offset);
    e.degree = take_int("d", e.degree);
    enc = e;
  } else if (name == "coherent") {
    enc = Coherent{take_int("cutoff", 16)};
  } else if (name == "wavepacket") {
    PositionWavepacket e;
    e.width = take_double("sigma", e.width);
    e.grid_points = take_int("points", e.grid_points);
    e.grid_extent = take_double("extent", e.grid_extent);
    enc = e;
  } else if (name == "evolution") {
    Evolution e;
    e.field = take_double("field", e.field);
    e.time = take_double("t0", e.time);
    enc = e;
  } else {
    throw ContractError("unknown encoder '" + name + "'");
  }
  if (!params.empty()) {
    throw ContractError("unknown parameter '" + params.begin()->first +
                        "' for encoder " + name);
  }
  validate(enc);
  return enc;
}

std::size_t feature_dimension(const FeatureEncoder& enc, std::size_t n) {
  return std::visit(
      Overloaded{
          [&](const BasicQubit&) { return saturating_pow(2, n); },
          [&](const Amplitude&) { return n; },
          [&](const PolyTensor& e) {
            return saturating_pow(n, static_cast<std::size_t>(e.degree));
          },
          [&](const AffineAmplitude& e) {
            return saturating_pow(n + 1, static_cast<std::size_t>(e.degree));
          },
          [&](const Coherent& e) {
            return saturating_pow(static_cast<std::size_t>(e.cutoff) + 1, n);
          },
          [&](const PositionWavepacket& e) {
            return saturating_pow(static_cast<std::size_t>(e.grid_points), n);
          },
          [&](const Evolution&) { return saturating_pow(2, n + 2); },
      },
      enc);
}

std::size_t EncodedState::dimension() const {
  std::size_t d = 1;
  for (const auto& f : factors) {
    const auto n = static_cast<std::size_t>(f.size());
    if (d > std::numeric_limits<std::size_t>::max() / n) {
      return std::numeric_limits<std::size_t>::max();
    }
    d *= n;
  }
  return d;
}

ComplexVector EncodedState::amplitudes() const {
  const std::size_t dim = dimension();
  if (dim > kMaxMaterialized) {
    throw ContractError("encoded state of dimension " + std::to_string(dim) +
                        " is too large to materialize");
  }
  ComplexVector out = ComplexVector::Ones(1);
  for (const auto& f : factors) {
    ComplexVector next(out.size() * f.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      next.segment(i * f.size(), f.size()) = out(i) * f;
    }
    out = std::move(next);
  }
  return out;
}

EncodedState encode(const FeatureEncoder& enc, std::span<const double> a) {
  validate(enc);
  if (a.empty()) throw DataError("cannot encode an empty feature vector");
  require_finite(a);
  return std::visit(
      Overloaded{
          [&](const BasicQubit&) { return encode_basic(a); },
          [&](const Amplitude&) { return encode_amplitude(a, 1); },
          [&](const PolyTensor& e) { return encode_amplitude(a, e.degree); },
          [&](const AffineAmplitude& e) { return encode_affine(a, e); },
          [&](const Coherent& e) { return encode_coherent(a, e); },
          [&](const PositionWavepacket& e) {
            EncodedState s;
            for (double x : a) s.factors.push_back(wavepacket(x, e));
            return s;
          },
          [&](const Evolution& e) { return encode_evolution(a, e); },
      },
      enc);
}

Complex overlap(const EncodedState& x, const EncodedState& y) {
  if (x.factors.size() != y.factors.size()) {
    throw ContractError("overlap: states have different factor structure");
  }
  Complex out = 1.0;
  for (std::size_t k = 0; k < x.factors.size(); ++k) {
    if (x.factors[k].size() != y.factors[k].size()) {
      throw ContractError("overlap: factor dimensions differ");
    }
    out *= x.factors[k].dot(y.factors[k]);  // conjugate-linear in x
  }
  return out;
}

double kernel(const FeatureEncoder& enc, std::span<const double> a,
              std::span<const double> b) {
  validate(enc);
  require_same_length(a, b);
  require_finite(a);
  require_finite(b);
  const auto normalized_dot = [&]() {
    const double na = std::sqrt(squared_norm(a));
    const double nb = std::sqrt(squared_norm(b));
    if (!(na > 0.0) || !(nb > 0.0)) {
      throw DataError("amplitude kernel of a zero vector");
    }
    return dot(a, b) / (na * nb);
  };
  const auto distance2 = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
  };
  return std::visit(
      Overloaded{
          [&](const Amplitude&) { return normalized_dot(); },
          [&](const PolyTensor& e) { return std::pow(normalized_dot(), e.degree); },
          [&](const AffineAmplitude& e) {
            const double c2 = e.offset * e.offset;
            const double v = (dot(a, b) + c2) /
                             std::sqrt((c2 + squared_norm(a)) * (c2 + squared_norm(b)));
            return std::pow(v, e.degree);
          },
          [&](const Coherent&) { return std::exp(-0.5 * distance2()); },
          [&](const PositionWavepacket& e) {
            return std::exp(-distance2() / (4.0 * e.width * e.width));
          },
          [&](const BasicQubit&) { return kernel_via_state(enc, a, b).real(); },
          [&](const Evolution&) { return kernel_via_state(enc, a, b).real(); },
      },
      enc);
}

Complex kernel_via_state(const FeatureEncoder& enc, std::span<const double> a,
                         std::span<const double> b) {
  require_same_length(a, b);
  const EncodedState x = encode(enc, a);
  const EncodedState y = encode(enc, b);
  return overlap(x, y) * x.norm * y.norm;
}

double coherent_truncation_bound(const Coherent& enc, std::span<const double> a,
                                 std::span<const double> b) {
  require_same_length(a, b);
  double bound = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double ta = 0.0;
    double tb = 0.0;
    coherent_fock(a[i], enc.cutoff, ta);
    coherent_fock(b[i], enc.cutoff, tb);
    bound += (1.0 - std::sqrt((1.0 - ta) * (1.0 - tb))) + std::sqrt(ta * tb);
  }
  return bound;
}

ComplexVector coherent_state_by_displacement(double x, int cutoff,
                                             int working_dimension) {
  if (cutoff < 2 || working_dimension <= cutoff) {
    throw ContractError("displacement: working dimension must exceed cutoff");
  }
  ComplexMatrix generator = ComplexMatrix::Zero(working_dimension, working_dimension);
  for (int n = 1; n < working_dimension; ++n) {
    const double s = std::sqrt(static_cast<double>(n));
    generator(n, n - 1) = x * s;   // x a^dag
    generator(n - 1, n) = -x * s;  // -x a
  }
  const ComplexMatrix d = numerics::matrix_exponential(generator, 1.0);
  ComplexVector v = d.col(0).head(cutoff + 1);
  v /= v.norm();
  return v;
}

ComplexMatrix ising_hamiltonian(std::span<const double> couplings, double field) {
  const std::size_t qubits = couplings.size() + 1;
  if (qubits > static_cast<std::size_t>(kMaxEvolutionQubits)) {
    throw ContractError("evolution encoder supports at most " +
                        std::to_string(kMaxEvolutionQubits - 1) + " features");
  }
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  // Qubit 0 is the most significant bit of the basis index.
  auto bit = [&](Eigen::Index index, std::size_t q) {
    return (index >> (qubits - 1 - q)) & 1;
  };
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (std::size_t j = 0; j + 1 < qubits; ++j) {
      const double zz = bit(s, j) == bit(s, j + 1) ? 1.0 : -1.0;
      diag += couplings[j] * zz;
    }
    h(s, s) = diag;
    for (std::size_t q = 0; q < qubits; ++q) {
      h(s ^ (Eigen::Index{1} << (qubits - 1 - q)), s) += field;
    }
  }
  return h;
}

}  // namespace qkrr::encoding
