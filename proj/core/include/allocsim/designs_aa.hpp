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

#include "allocsim/downcrossing.hpp"
#include "allocsim/state.hpp"

namespace allocsim {

/// Assignment-adaptive rules: the allocation probability reads only the past
/// assignments. Two-arm kinds except for the two multi-arm balance rules.
enum class AaKind {
  kCompleteRandomization,
  kEfron,
  kEfronExtended,
  kWeiAdaptive,
  kAdjustableBcd,   // step-indexed family F(D_n)
  kAaStar,          // one-sided favoring rule; asymmetric on purpose
  kWeiMultiOdds,    // K arms, reciprocal-odds weights
  kWeiMultiLinear,  // K arms, (1 - pi_j)/(K - 1)
  kCustom,          // user-supplied two-arm allocation function
};

class AaRule {
 public:
  static AaRule complete_randomization();
  /// Favor the under-represented arm with probability p in [1/2, 1].
  static AaRule efron(double p);
  /// Skewed coin converging to `target`: probabilities p2 above the diagonal,
  /// p1 below, with 0 <= p1 <= target <= p2 <= 1 and at least one strict.
  static AaRule efron_extended(double target, double p1, double p2);
  /// f: [-1,1] -> [0,1], continuous decreasing, f(-x) = 1 - f(x); the rule is
  /// f(2*pi - 1). Properties are grid-checked at construction.
  static AaRule wei_adaptive(std::function<double(double)> f);
  /// F: R -> [0,1], decreasing, F(-x) = 1 - F(x); the rule is F(D_n), one
  /// allocation function per step.
  static AaRule adjustable_bcd(std::function<double(double)> big_f);
  static AaRule aa_star();
  static AaRule wei_multi_odds(int arms);
  static AaRule wei_multi_linear(int arms);
  /// User-supplied two-arm allocation function. Monotonicity stays a claim of
  /// the map; it is checked by the solver and the verification grids, not
  /// here.
  static AaRule custom(ScalarMap map);

  AaKind kind() const noexcept { return kind_; }
  int arm_count() const noexcept { return arms_; }
  /// True for every kind that reads pi_n (everything except CR).
  bool needs_history() const noexcept { return kind_ != AaKind::kCompleteRandomization; }

  /// Per-arm assignment probabilities at the current state. Case splits on
  /// the imbalance are exact integer tests on the counts. Rules that read
  /// pi_n error on an empty state.
  std::vector<double> probabilities(const AllocationState& state) const;

  /// The allocation function x -> phi(x) as the solvers consume it. For the
  /// adjustable coin this is the family member at the given step.
  ScalarMap allocation_map(long step = 1) const;
  VectorMap allocation_map_multi() const;

  /// Theoretical per-arm limiting allocation, via the downcrossing solvers.
  /// The adjustable coin returns balance directly: every member of its family
  /// shares the same downcrossing.
  std::vector<double> limit() const;
  DowncrossingResult limit_diagnostics() const;  // two-arm kinds

 private:
  AaRule() = default;

  AaKind kind_ = AaKind::kCompleteRandomization;
  int arms_ = 2;
  double p_ = 0.5;                          // efron
  double target_ = 0.5, p1_ = 0.5, p2_ = 0.5;  // extended
  std::function<double(double)> f_;         // wei / adjustable
  ScalarMap custom_;
};

}  // namespace allocsim
