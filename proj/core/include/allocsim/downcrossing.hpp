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

#include <functional>
#include <vector>

#include "allocsim/errors.hpp"

namespace allocsim {

/// An allocation function on [0,1]. Monotonicity is a claim, not a proven
/// property: the solver spot-checks it on a probe grid and reports violations
/// instead of silently tolerating them.
struct ScalarMap {
  std::function<double(double)> eval;
  bool claims_nonincreasing = true;
};

/// A componentwise map on [0,1]^K.
struct VectorMap {
  std::function<std::vector<double>(const std::vector<double>&)> eval;
  int dimension = 0;
};

enum class CrossingKind {
  kFixedPoint,  // |f(t) - t| <= tolerance
  kJump,        // the graph steps across the diagonal; f(t-eps) >= t >= f(t+eps)
};

/// A located downcrossing: the point where the map sits at or above the
/// diagonal to the left and at or below it to the right.
struct DowncrossingResult {
  std::vector<double> point;  // length 1 for scalar maps, K for vectorial ones
  double residual = 0.0;      // |f(t) - t|, sup-norm for vectorial maps
  double bracket_width = 0.0;
  int iterations = 0;
  CrossingKind kind = CrossingKind::kFixedPoint;

  double value() const { return point.front(); }
};

struct ScalarSolveOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;  // 2^-200 << tolerance; the cap only guards NaN evaluators
  int probe_grid = 64;       // monotonicity / range spot check
};

struct VectorSolveOptions {
  double tolerance = 1e-8;  // sup-norm; coarser than scalar since each component
                            // evaluation may itself be a Monte Carlo average
  int max_iterations = 1000;
  double damping = 0.5;
  int fallback_sweeps = 50;  // round-robin coordinate bisection sweeps
  int probe_grid = 33;       // componentwise verification grid
};

/// Locates the downcrossing of a nonincreasing map on [0,1] by bisection on
/// the sign of f(x) - x. Step functions whose graph jumps across the diagonal
/// yield kind == kJump at the jump abscissa. Boundary downcrossings (t in
/// {0,1}) are reported as errors; the convergence theory needs interior ones.
DowncrossingResult find_downcrossing(const ScalarMap& f, double tolerance = 1e-10);
DowncrossingResult find_downcrossing(const ScalarMap& f, const ScalarSolveOptions& options);

/// Damped fixed-point iteration x <- (1-damping)x + damping*F(x) for a
/// componentwise-nonincreasing map, with a coordinate-bisection fallback. The
/// result is verified componentwise on a probe grid with the remaining
/// coordinates frozen at the solution.
DowncrossingResult find_vectorial_downcrossing(const VectorMap& map, double tolerance,
                                               int max_iterations);
DowncrossingResult find_vectorial_downcrossing(const VectorMap& map,
                                               const VectorSolveOptions& options = {});

struct DowncrossingViolation {
  double x = 0.0;
  double value = 0.0;  // f(x) on the wrong side of t
};

struct DowncrossingCheck {
  bool ok = true;
  std::vector<DowncrossingViolation> violations;
};

/// Evaluates both defining inequalities of a downcrossing on a uniform grid
/// (excluding t itself): f(x) >= t for x < t, f(x) <= t for x > t, with a
/// small slack for float noise. Violations come back with coordinates.
DowncrossingCheck verify_downcrossing(const ScalarMap& f, double t, int grid_size,
                                      double slack = 1e-12);

/// For a composite map outer(inner(x)) with `outer` decreasing on the inner
/// map's range and `inner` continuous increasing on [0,1]: given a witness d
/// with outer(d) == inner^{-1}(d), the downcrossing is inner^{-1}(d). The
/// witness is checked, and the result is cross-checked against
/// find_downcrossing on the composite.
double composite_downcrossing(const std::function<double(double)>& outer_decreasing,
                              const std::function<double(double)>& inner_increasing, double d,
                              double tolerance = 1e-10);

}  // namespace allocsim
