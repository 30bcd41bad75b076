// Copyright 2026 The allocsim Authors
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

namespace allocsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Arguments outside their documented domain: bad indices, parameters out of
/// range, evaluators returning values outside [0,1], invalid distributions.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The current state does not carry enough information: proportions of an
/// empty state, a rule that needs history at step 0, estimates from an arm
/// with no observations, a missing diagnostic path.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Solver failures: non-convergence, monotonicity violated on the probe grid,
/// a downcrossing at the boundary of [0,1], a composite witness that does not
/// check out.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Singular or degenerate numerical problems (rank-deficient design matrix
/// even after the ridge fallback, degenerate model parameters).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration problems: design/model mismatch, malformed spec
/// files, invalid run parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace allocsim
