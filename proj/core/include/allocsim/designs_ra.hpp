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
#include <span>

#include "allocsim/downcrossing.hpp"
#include "allocsim/models.hpp"

namespace allocsim {

/// Response-adaptive rules: the allocation probability reads pi_n and the
/// current parameter estimate (or the estimated target computed from it).
enum class RaKind {
  kDawd,       // weighted mix of an ethical lean and a balance pull
  kDbcd,       // doubly-adaptive coin, power family
  kErade,      // discontinuous target-forcing coin
  kPowerRule,  // target^tau above the target, target^(1/tau) at or below
  kSml,        // plays the estimated target directly
};

/// The doubly-adaptive coin map used by kDbcd (and by the stratified
/// reinforced rule): phi(x; y) = y(y/x)^nu / [y(y/x)^nu + (1-y)((1-y)/(1-x))^nu],
/// computed in log space so large exponents stay finite, with the limit
/// convention phi(0; y) = 1 and phi(1; y) = 0.
double dbcd_power_map(double x, double y, double nu);

class RaRule {
 public:
  /// ethical_weight in [0,1); lean g1 nondecreasing with g1(0)=1/2, g1(1)=1;
  /// pull g2 decreasing with g2(0)=1/2, g2(-1)=1; both odd around 0 in the
  /// sense g(-x) = 1 - g(x). Defaults: g1(u) = (1+u)/2, g2(u) = (1-u)/2.
  static RaRule dawd(double ethical_weight, std::function<double(double)> lean = {},
                     std::function<double(double)> pull = {});
  static RaRule dbcd(double nu, TargetFunction target);
  static RaRule erade(double alpha, TargetFunction target);
  static RaRule power_rule(double tau, TargetFunction target);
  static RaRule sml(TargetFunction target);

  RaKind kind() const noexcept { return kind_; }
  const TargetFunction& target() const;

  /// Probability of arm A given the current proportion and the current
  /// estimate ((pA, pB) for the designs in this artifact).
  double probability(double pi, std::span<const double> estimate) const;

  /// The phi-breve form: target value already evaluated. Not defined for the
  /// weighted-differences rule, which reads the estimate difference directly.
  double probability_from_target(double pi, double target_value) const;

  /// Limiting allocation at the true parameters: the generalized downcrossing
  /// evaluated there. Target rules return the target; the weighted-
  /// differences rule solves its fixed point by bisection.
  double limit(std::span<const double> true_params) const;

  /// x -> phi(x; estimate frozen), as fed to the solver and the verifiers.
  ScalarMap allocation_map(std::span<const double> estimate) const;

 private:
  RaRule() = default;

  RaKind kind_ = RaKind::kSml;
  double rho_ = 0.0;    // dawd ethical weight
  double nu_ = 2.0;     // dbcd
  double alpha_ = 0.0;  // erade
  double tau_ = 1.0;    // power rule
  std::function<double(double)> lean_, pull_;
  TargetFunction target_;
  bool has_target_ = false;
};

}  // namespace allocsim
