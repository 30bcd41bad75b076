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

#include <vector>

namespace allocsim::linalg {

struct SolveResult {
  std::vector<double> x;
  bool used_ridge = false;  // diagonal ridge applied after a singular pivot
};

/// Solves the n x n system a*x = b (a row-major, consumed) by Gaussian
/// elimination with partial pivoting. The systems here are tiny normal
/// equations (dimension <= ~10). If the plain solve hits a singular pivot and
/// ridge > 0, retries once with `ridge` added to the diagonal and flags the
/// result; throws NumericError if still singular.
SolveResult solve(std::vector<double> a, std::vector<double> b, int n, double ridge);

}  // namespace allocsim::linalg
