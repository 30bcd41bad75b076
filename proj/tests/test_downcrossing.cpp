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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "allocsim/downcrossing.hpp"
#include "allocsim/rng.hpp"

using namespace allocsim;

namespace {

// Independent oracle: scan the defining inequalities on a dense grid. This is
// test-only machinery, deliberately separate from the solver's path.
bool grid_scan_is_downcrossing(const std::function<double(double)>& f, double t, long grid,
                               double slack = 1e-9) {
  for (long i = 0; i <= grid; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(grid);
    if (std::abs(x - t) < 2.0 / static_cast<double>(grid)) continue;
    const double v = f(x);
    if (x < t && v < t - slack) return false;
    if (x > t && v > t + slack) return false;
  }
  return true;
}

// Independent oracle: plain bisection on f(x) - x with its own loop.
double oracle_bisect(const std::function<double(double)>& f, int iterations = 300) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) - mid > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double cardano_root(double p, double q) {
  // real root of t^3 + p t + q = 0 for positive discriminant
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  const double s = std::sqrt(disc);
  return std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s);
}

}  // namespace

TEST_CASE("constant map has its value as the downcrossing") {
  const DowncrossingResult r = find_downcrossing({[](double) { return 0.5; }, true});
  CHECK(r.value() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(r.kind == CrossingKind::kFixedPoint);
  CHECK(r.bracket_width <= 1e-10);
}

TEST_CASE("1 - x crosses at one half") {
  const DowncrossingResult r = find_downcrossing({[](double x) { return 1.0 - x; }, true});
  CHECK(std::abs(r.value() - 0.5) <= 1e-10);
  CHECK(r.kind == CrossingKind::kFixedPoint);
}

TEST_CASE("1 - x^2 crosses at the golden-ratio conjugate") {
  auto f = [](double x) { return 1.0 - x * x; };
  const double analytic = (std::sqrt(5.0) - 1.0) / 2.0;  // root of x^2 + x - 1
  const DowncrossingResult r = find_downcrossing({f, true});
  CHECK(std::abs(r.value() - analytic) <= 1e-10);
  // dense-grid scan of the defining property, one million points
  CHECK(grid_scan_is_downcrossing(f, r.value(), 1000000));
}

TEST_CASE("the two-sided coin step crosses at one half as a jump") {
  const double p = 0.75;
  auto efron = [p](double x) { return x < 0.5 ? p : (x > 0.5 ? 1.0 - p : 0.5); };
  const DowncrossingResult r = find_downcrossing({efron, true});
  CHECK(r.kind == CrossingKind::kJump);
  CHECK(std::abs(r.value() - 0.5) <= 1e-10);
  CHECK(r.bracket_width <= 1e-10);
  CHECK(grid_scan_is_downcrossing(efron, 0.5, 100000));
}

TEST_CASE("tolerance floor and monotonicity claims are enforced") {
  ScalarMap fine{[](double x) { return 1.0 - x; }, true};
  CHECK_THROWS_AS(find_downcrossing(fine, 1e-16), DomainError);

  ScalarMap unclaimed{[](double x) { return 1.0 - x; }, false};
  CHECK_THROWS_AS(find_downcrossing(unclaimed), SolverError);

  ScalarMap increasing{[](double x) { return x * 0.5 + 0.2; }, true};
  CHECK_THROWS_AS(find_downcrossing(increasing), SolverError);

  ScalarMap out_of_range{[](double x) { return 1.2 - x; }, true};
  CHECK_THROWS_AS(find_downcrossing(out_of_range), DomainError);
}

TEST_CASE("boundary downcrossings are reported, not returned") {
  ScalarMap zero{[](double) { return 0.0; }, true};
  CHECK_THROWS_AS(find_downcrossing(zero), SolverError);
  ScalarMap one{[](double) { return 1.0; }, true};
  CHECK_THROWS_AS(find_downcrossing(one), SolverError);
}

TEST_CASE("verify_downcrossing accepts the true point and reports violations") {
  const ScalarMap line{[](double x) { return 1.0 - x; }, true};
  CHECK(verify_downcrossing(line, 0.5, 1000).ok);

  const DowncrossingCheck bad = verify_downcrossing(line, 0.6, 1000);
  CHECK_FALSE(bad.ok);
  // a witness below t where the map already dropped under t, e.g. x = 0.55
  bool found = false;
  for (const DowncrossingViolation& v : bad.violations)
    if (std::abs(v.x - 0.55) < 1e-6 && std::abs(v.value - 0.45) < 1e-6) found = true;
  CHECK(found);

  const ScalarMap efron{[](double x) { return x < 0.5 ? 0.75 : (x > 0.5 ? 0.25 : 0.5); }, true};
  CHECK(verify_downcrossing(efron, 0.5, 1000).ok);

  CHECK_THROWS_AS(verify_downcrossing(line, 0.5, 1), DomainError);
}

TEST_CASE("twenty analytic decreasing maps with known crossings") {
  struct Case {
    std::function<double(double)> f;
    double expected;
  };
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  const std::vector<Case> cases = {
      {[](double) { return 0.5; }, 0.5},
      {[](double) { return 0.1; }, 0.1},
      {[](double) { return 0.3; }, 0.3},
      {[](double) { return 0.62; }, 0.62},
      {[](double) { return 0.9; }, 0.9},
      {[](double x) { return 1.0 - x; }, 0.5},
      {[](double x) { return 1.0 - x * x; }, golden},
      {[](double x) { return 1.0 / (1.0 + x); }, golden},
      {[](double x) { return (1.0 - x) * (1.0 - x); }, (3.0 - std::sqrt(5.0)) / 2.0},
      {[](double x) { return std::exp(-x); }, 0.5671432904097838729999686622},  // x = e^-x
      {[](double x) { return 1.0 - x * x * x; }, cardano_root(1.0, -1.0)},
      {[](double x) { return 1.0 / (1.0 + x * x); }, cardano_root(1.0, -1.0)},
      {[](double x) { return (1.0 - x * x * x) / 2.0; }, cardano_root(2.0, -1.0)},
      {[](double x) { return (1.0 + std::cos(3.141592653589793 * x)) / 2.0; }, 0.5},
      {[](double x) { return 0.8 - 0.6 * x; }, 0.5},
      {[](double x) { return (2.0 - x) / 3.0; }, 0.5},
      {[](double x) { return 0.85 - 0.5 * x; }, 0.85 / 1.5},
      {[](double x) { return 0.75 - 0.25 * x; }, 0.6},
      {[](double x) { return 0.9 - 0.5 * x * x; }, -1.0 + std::sqrt(2.8)},  // 0.5x^2 + x - 0.9
      {[](double x) { return 0.2 + 0.6 * std::exp(-2.0 * x); }, -1.0},     // oracle-bisected below
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CAPTURE(i);
    const double expected =
        cases[i].expected >= 0.0 ? cases[i].expected : oracle_bisect(cases[i].f);
    const DowncrossingResult r = find_downcrossing({cases[i].f, true});
    CHECK(std::abs(r.value() - expected) <= 1e-10);
    CHECK(grid_scan_is_downcrossing(cases[i].f, r.value(), 10000));
  }
}

TEST_CASE("random decreasing maps keep the bisection bracket invariant") {
  Rng rng(21, 0);
  for (int trial = 0; trial < 50; ++trial) {
    // a + b(1-x)^c with a,b >= 0, a+b <= 1, c >= 1: decreasing into [0,1]
    const double a = 0.05 + 0.4 * rng.next_double();
    const double b = 0.1 + (0.95 - a - 0.1) * rng.next_double();
    const double c = 1.0 + 3.0 * rng.next_double();
    auto f = [a, b, c](double x) { return a + b * std::pow(1.0 - x, c); };
    const DowncrossingResult r = find_downcrossing({f, true});
    CHECK(r.bracket_width <= 1e-10);
    CHECK(std::abs(f(r.value()) - r.value()) <= 1e-8);  // Lipschitz(f) <= b*c <= 4
    CHECK(grid_scan_is_downcrossing(f, r.value(), 2000));
  }
}

TEST_CASE("composite crossings agree with the inverse of the inner map") {
  // linear lean composed with the (2w - 1) recentering
  auto outer = [](double u) { return (1.0 - u) / 2.0; };
  auto inner = [](double w) { return 2.0 * w - 1.0; };
  CHECK(composite_downcrossing(outer, inner, 0.0) == doctest::Approx(0.5).epsilon(1e-9));

  // trivial pair: decreasing outer hits the identity-like witness at 0.3
  auto outer2 = [](double u) { return std::max(0.0, 0.6 - u); };
  auto inner2 = [](double w) { return w; };
  CHECK(composite_downcrossing(outer2, inner2, 0.3) == doctest::Approx(0.3).epsilon(1e-9));

  // cubic lean: cross-check against an independent bisection of the composite
  auto outer3 = [](double u) { return (1.0 - u * u * u) / 2.0; };
  const double direct = oracle_bisect([&](double x) { return outer3(inner(x)); });
  CHECK(std::abs(composite_downcrossing(outer3, inner, 0.0) - direct) <= 1e-10);

  // failed witness: outer(d) != inner^{-1}(d)
  auto outer_bad = [](double u) { return 0.9 - u; };
  CHECK_THROWS_AS(composite_downcrossing(outer_bad, inner2, 0.3), DomainError);
}

TEST_CASE("vectorial: constant maps return their value") {
  const VectorMap constant{[](const std::vector<double>&) {
                             return std::vector<double>{0.2, 0.5, 0.3};
                           },
                           3};
  const DowncrossingResult r = find_vectorial_downcrossing(constant);
  CHECK(r.point[0] == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(r.point[1] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.point[2] == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("vectorial: three-arm linear balance rule crosses at one third") {
  const VectorMap linear{[](const std::vector<double>& x) {
                           std::vector<double> out(3);
                           for (int j = 0; j < 3; ++j) out[j] = (1.0 - x[j]) / 2.0;
                           return out;
                         },
                         3};
  const DowncrossingResult r = find_vectorial_downcrossing(linear);
  for (double c : r.point) CHECK(std::abs(c - 1.0 / 3.0) <= 1e-8);
  CHECK(r.residual <= 1e-8);
}

TEST_CASE("vectorial: two-arm odds rule crosses at one half, brute-forced on the simplex") {
  auto odds = [](const std::vector<double>& x) {
    std::vector<double> o(2);
    double total = 0.0;
    for (int j = 0; j < 2; ++j) {
      o[j] = 1.0 / x[j] - 1.0;
      total += o[j];
    }
    for (double& v : o) v /= total;
    return o;
  };
  const DowncrossingResult r = find_vectorial_downcrossing({odds, 2});
  CHECK(std::abs(r.point[0] - 0.5) <= 1e-8);
  CHECK(std::abs(r.point[1] - 0.5) <= 1e-8);

  // Brute force over the proportion simplex (x, 1-x) at step 1e-3: both
  // defining inequalities hold at t = (1/2, 1/2). Off the simplex the odds
  // rule violates them, so the scan stays where the process lives.
  for (int i = 1; i < 1000; ++i) {
    const double x = i / 1000.0;
    if (std::abs(x - 0.5) < 2e-3) continue;
    const std::vector<double> v = odds({x, 1.0 - x});
    if (x < 0.5) {
      CHECK(v[0] >= 0.5 - 1e-12);
    } else {
      CHECK(v[0] <= 0.5 + 1e-12);
    }
    if (1.0 - x < 0.5) {
      CHECK(v[1] >= 0.5 - 1e-12);
    } else {
      CHECK(v[1] <= 0.5 + 1e-12);
    }
  }
}

TEST_CASE("vectorial: full-square brute force for the linear rule") {
  // component j depends only on x_j, so the inequalities hold on all of
  // [0,1]^2, scanned at step 1e-3
  auto linear = [](double xj) { return (1.0 - xj) / 2.0; };
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    if (std::abs(x - 1.0 / 3.0) < 2e-3) continue;
    const double v = linear(x);
    if (x < 1.0 / 3.0) {
      CHECK(v >= 1.0 / 3.0 - 1e-12);
    } else {
      CHECK(v <= 1.0 / 3.0 + 1e-12);
    }
  }
}

TEST_CASE("vectorial solver rejects bad maps") {
  const VectorMap wrong_dim{[](const std::vector<double>&) {
                              return std::vector<double>{0.5};
                            },
                            2};
  CHECK_THROWS_AS(find_vectorial_downcrossing(wrong_dim), DomainError);

  const VectorMap out_of_range{[](const std::vector<double>& x) {
                                 return std::vector<double>{1.5 - x[0], 0.5};
                               },
                               2};
  CHECK_THROWS_AS(find_vectorial_downcrossing(out_of_range), DomainError);

  // increasing component: no downcrossing; the fallback must not fabricate one
  const VectorMap increasing{[](const std::vector<double>& x) {
                               return std::vector<double>{0.2 + 0.6 * x[0], 0.5};
                             },
                             2};
  CHECK_THROWS_AS(find_vectorial_downcrossing(increasing), SolverError);
}
