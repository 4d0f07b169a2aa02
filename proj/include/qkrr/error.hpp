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

#include <stdexcept>
#include <string>

namespace qkrr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition (wrong shape, wrong basis,
/// invalid parameter).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (CSV contents, feature values).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed or its result is unusable (singular system,
/// non-convergence, grid too coarse).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Raised when K is singular and no ridge term was supplied.
class RegularizationRequired : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Runs f, re-raising any library error with `prefix` prepended to the
/// message. The error category is preserved.
template <class F>
decltype(auto) with_context(const std::string& prefix, F&& f) {
  try {
    return f();
  } catch (const RegularizationRequired& e) {
    throw RegularizationRequired(prefix + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + ": " + e.what());
  } catch (const ContractError& e) {
    throw ContractError(prefix + ": " + e.what());
  }
}

}  // namespace qkrr
