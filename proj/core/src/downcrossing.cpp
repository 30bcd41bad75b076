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

#include "allocsim/downcrossing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace allocsim {

namespace {

constexpr double kToleranceFloor = 1e-14;

double checked_eval(const ScalarMap& f, double x) {
  const double v = f.eval(x);
  if (!(v >= 0.0 && v <= 1.0))
    throw DomainError("scalar map returned " + std::to_string(v) + " at x=" +
                      std::to_string(x) + ", outside [0,1]");
  return v;
}

// Spot check: range on the whole grid, nonincreasing up to float noise.
void probe_scalar_map(const ScalarMap& f, int grid) {
  double prev = checked_eval(f, 0.0);
  for (int i = 1; i < grid; ++i) {
    const double x = static_cast<double>(i) / (grid - 1);
    const double v = checked_eval(f, x);
    if (v > prev + 1e-9)
      throw SolverError("map is not nonincreasing: f(" + std::to_string(x) + ")=" +
                        std::to_string(v) + " exceeds earlier value " + std::to_string(prev));
    prev = v;
  }
}

std::vector<double> checked_eval_vector(const VectorMap& map, const std::vector<double>& x) {
  std::vector<double> v = map.eval(x);
  if (static_cast<int>(v.size()) != map.dimension)
    throw DomainError("vector map returned wrong dimension");
  for (double c : v)
    if (!(c >= 0.0 && c <= 1.0))
      throw DomainError("vector map component " + std::to_string(c) + " outside [0,1]");
  return v;
}

double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

DowncrossingResult find_downcrossing(const ScalarMap& f, double tolerance) {
  ScalarSolveOptions options;
  options.tolerance = tolerance;
  return find_downcrossing(f, options);
}

DowncrossingResult find_downcrossing(const ScalarMap& f, const ScalarSolveOptions& options) {
  if (!f.eval) throw DomainError("find_downcrossing: empty evaluator");
  if (!f.claims_nonincreasing)
    throw SolverError("find_downcrossing: map does not claim to be nonincreasing");
  const double tol = options.tolerance;
  if (!(tol >= kToleranceFloor))
    throw DomainError("find_downcrossing: tolerance below machine-scale floor");

  probe_scalar_map(f, options.probe_grid);

  // g(x) = f(x) - x is strictly decreasing; g(0) >= 0 >= g(1) since the range
  // is [0,1]. Equality at an endpoint means a boundary downcrossing.
  if (checked_eval(f, 0.0) <= 0.0)
    throw SolverError("downcrossing at boundary t=0; interior point required");
  if (checked_eval(f, 1.0) >= 1.0)
    throw SolverError("downcrossing at boundary t=1; interior point required");

  // Shrink the bracket past the requested tolerance so that a fixed point of
  // any moderately steep continuous map classifies by residual alone.
  const double target_width = tol / 8.0;
  double lo = 0.0;
  double hi = 1.0;
  double g_lo = checked_eval(f, lo) - lo;
  int iterations = 0;
  while (hi - lo > target_width && iterations < options.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = checked_eval(f, mid) - mid;
    if (g_mid > 0.0) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
    ++iterations;
  }
  if (hi - lo > tol)
    throw SolverError("find_downcrossing: bracket stalled at width " + std::to_string(hi - lo) +
                      " after " + std::to_string(iterations) + " iterations, last lo=" +
                      std::to_string(lo));

  DowncrossingResult result;
  const double t = 0.5 * (lo + hi);
  result.point = {t};
  result.bracket_width = hi - lo;
  result.iterations = iterations;
  result.residual = std::abs(checked_eval(f, t) - t);

  if (result.residual <= tol && g_lo <= tol) {
    result.kind = CrossingKind::kFixedPoint;
  } else {
    // Step across the diagonal: confirm the defining inequalities just
    // outside the bracket.
    result.kind = CrossingKind::kJump;
    const double eps = std::max(16.0 * tol, 1e-9);
    const double left = checked_eval(f, std::max(0.0, t - eps));
    const double right = checked_eval(f, std::min(1.0, t + eps));
    if (!(left >= t - tol && right <= t + tol))
      throw SolverError("find_downcrossing: jump at t=" + std::to_string(t) +
                        " failed the probe check (f(t-eps)=" + std::to_string(left) +
                        ", f(t+eps)=" + std::to_string(right) + ")");
  }
  return result;
}

namespace {

// Verify the located vector point componentwise: scan coordinate i over an
// interior grid with the others frozen at t.
void verify_vector_point(const VectorMap& map, const std::vector<double>& t,
                         const VectorSolveOptions& options) {
  const double slack = 10.0 * options.tolerance;
  const int grid = options.probe_grid;
  std::vector<double> x = t;
  for (int i = 0; i < map.dimension; ++i) {
    for (int g = 0; g < grid; ++g) {
      const double xi = (g + 0.5) / grid;  // open interior; some maps blow up at 0 or 1
      x[static_cast<std::size_t>(i)] = xi;
      const double v = checked_eval_vector(map, x)[static_cast<std::size_t>(i)];
      const double ti = t[static_cast<std::size_t>(i)];
      if (xi < ti && v < ti - slack)
        throw SolverError("vectorial downcrossing check failed: component " + std::to_string(i) +
                          " at x=" + std::to_string(xi) + " gives " + std::to_string(v) +
                          " < t=" + std::to_string(ti));
      if (xi > ti && v > ti + slack)
        throw SolverError("vectorial downcrossing check failed: component " + std::to_string(i) +
                          " at x=" + std::to_string(xi) + " gives " + std::to_string(v) +
                          " > t=" + std::to_string(ti));
    }
    x[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i)];
  }
}

// Bisect component i of the diagonal crossing with the other coordinates
// held fixed.
double coordinate_bisect(const VectorMap& map, std::vector<double> x, int i, double tol) {
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    x[static_cast<std::size_t>(i)] = mid;
    const double g = checked_eval_vector(map, x)[static_cast<std::size_t>(i)] - mid;
    if (g > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

DowncrossingResult find_vectorial_downcrossing(const VectorMap& map, double tolerance,
                                               int max_iterations) {
  VectorSolveOptions options;
  options.tolerance = tolerance;
  options.max_iterations = max_iterations;
  return find_vectorial_downcrossing(map, options);
}

DowncrossingResult find_vectorial_downcrossing(const VectorMap& map,
                                               const VectorSolveOptions& options) {
  if (!map.eval) throw DomainError("find_vectorial_downcrossing: empty evaluator");
  if (map.dimension < 1) throw DomainError("find_vectorial_downcrossing: dimension must be >= 1");
  const double tol = options.tolerance;
  if (!(tol >= kToleranceFloor))
    throw DomainError("find_vectorial_downcrossing: tolerance below machine-scale floor");

  std::vector<double> x(static_cast<std::size_t>(map.dimension), 0.5);
  DowncrossingResult result;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const std::vector<double> fx = checked_eval_vector(map, x);
    const double residual = sup_distance(fx, x);
    if (residual <= tol) {
      result.point = x;
      result.residual = residual;
      result.bracket_width = residual;
      result.iterations = iter;
      result.kind = CrossingKind::kFixedPoint;
      verify_vector_point(map, x, options);
      return result;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = (1.0 - options.damping) * x[i] + options.damping * fx[i];
  }

  // Damped iteration did not settle (step rules, strongly coupled
  // components): round-robin coordinate bisection.
  for (int sweep = 0; sweep < options.fallback_sweeps; ++sweep) {
    for (int i = 0; i < map.dimension; ++i)
      x[static_cast<std::size_t>(i)] = coordinate_bisect(map, x, i, tol / 4.0);
    const std::vector<double> fx = checked_eval_vector(map, x);
    const double residual = sup_distance(fx, x);
    if (residual <= tol) {
      result.point = x;
      result.residual = residual;
      result.bracket_width = residual;
      result.iterations = options.max_iterations + (sweep + 1) * map.dimension;
      result.kind = CrossingKind::kFixedPoint;
      verify_vector_point(map, x, options);
      return result;
    }
  }

  std::string where;
  for (double c : x) where += " " + std::to_string(c);
  throw SolverError("find_vectorial_downcrossing: no convergence; last iterate:" + where);
}

DowncrossingCheck verify_downcrossing(const ScalarMap& f, double t, int grid_size, double slack) {
  if (!f.eval) throw DomainError("verify_downcrossing: empty evaluator");
  if (grid_size < 2) throw DomainError("verify_downcrossing: grid_size must be >= 2");

  DowncrossingCheck check;
  for (int i = 0; i <= grid_size; ++i) {
    const double x = static_cast<double>(i) / grid_size;  // spacing 1/grid_size
    if (std::abs(x - t) < 1e-15) continue;
    const double v = checked_eval(f, x);
    const bool bad = (x < t) ? (v < t - slack) : (v > t + slack);
    if (bad) {
      check.ok = false;
      check.violations.push_back({x, v});
    }
  }
  return check;
}

double composite_downcrossing(const std::function<double(double)>& outer_decreasing,
                              const std::function<double(double)>& inner_increasing, double d,
                              double tolerance) {
  if (!outer_decreasing || !inner_increasing)
    throw DomainError("composite_downcrossing: empty map");
  if (!(tolerance >= kToleranceFloor))
    throw DomainError("composite_downcrossing: tolerance below machine-scale floor");

  const double at0 = inner_increasing(0.0);
  const double at1 = inner_increasing(1.0);
  if (!(at0 <= d && d <= at1))
    throw DomainError("composite_downcrossing: d=" + std::to_string(d) +
                      " outside the inner map's range [" + std::to_string(at0) + ", " +
                      std::to_string(at1) + "]");

  // Invert the increasing inner map at d.
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 200 && hi - lo > tolerance / 8.0; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (inner_increasing(mid) < d)
      lo = mid;
    else
      hi = mid;
  }
  const double inverse_at_d = 0.5 * (lo + hi);

  const double witness = outer_decreasing(d);
  if (std::abs(witness - inverse_at_d) > std::max(1e-8, 10.0 * tolerance))
    throw DomainError("composite_downcrossing: witness failed, outer(d)=" +
                      std::to_string(witness) + " but inner^{-1}(d)=" +
                      std::to_string(inverse_at_d));

  ScalarMap composite{[&](double x) { return outer_decreasing(inner_increasing(x)); }, true};
  const DowncrossingResult direct = find_downcrossing(composite, tolerance);
  if (std::abs(direct.value() - inverse_at_d) > 10.0 * tolerance)
    throw SolverError("composite_downcrossing: direct solve " + std::to_string(direct.value()) +
                      " disagrees with inner^{-1}(d)=" + std::to_string(inverse_at_d));

  return inverse_at_d;
}

}  // namespace allocsim
