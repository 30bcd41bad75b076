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

#include "allocsim/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <utility>

#include "allocsim/errors.hpp"

namespace allocsim::linalg {

namespace {

bool eliminate(std::vector<double>& a, std::vector<double>& b, int n) {
  const auto idx = [n](int r, int c) { return static_cast<std::size_t>(r * n + c); };

  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[idx(i, i)]));
  const double pivot_floor = std::max(scale, 1.0) * 1e-13;

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[idx(r, col)]) > std::abs(a[idx(pivot, col)])) pivot = r;
    if (std::abs(a[idx(pivot, col)]) < pivot_floor) return false;
    if (pivot != col) {
      for (int c = col; c < n; ++c) std::swap(a[idx(pivot, c)], a[idx(col, c)]);
      std::swap(b[static_cast<std::size_t>(pivot)], b[static_cast<std::size_t>(col)]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[idx(r, col)] / a[idx(col, col)];
      if (factor == 0.0) continue;
      for (int c = col; c < n; ++c) a[idx(r, c)] -= factor * a[idx(col, c)];
      b[static_cast<std::size_t>(r)] -= factor * b[static_cast<std::size_t>(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double sum = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c) sum -= a[idx(r, c)] * b[static_cast<std::size_t>(c)];
    b[static_cast<std::size_t>(r)] = sum / a[idx(r, r)];
  }
  return true;
}

}  // namespace

SolveResult solve(std::vector<double> a, std::vector<double> b, int n, double ridge) {
  if (n <= 0 || a.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n) ||
      b.size() != static_cast<std::size_t>(n))
    throw DomainError("linalg::solve: inconsistent dimensions");

  std::vector<double> a_work = a;
  std::vector<double> b_work = b;
  if (eliminate(a_work, b_work, n)) return {std::move(b_work), false};

  if (ridge > 0.0) {
    a_work = std::move(a);
    b_work = std::move(b);
    for (int i = 0; i < n; ++i)
      a_work[static_cast<std::size_t>(i * n + i)] += ridge;
    if (eliminate(a_work, b_work, n)) return {std::move(b_work), true};
  }
  throw NumericError("linalg::solve: singular system");
}

}  // namespace allocsim::linalg
