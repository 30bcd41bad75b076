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

#include <span>
#include <vector>

#include "allocsim/designs_ra.hpp"
#include "allocsim/downcrossing.hpp"
#include "allocsim/models.hpp"

namespace allocsim {

/// CARA rules with a continuous scalar covariate: the probability reads pi_n,
/// the current estimate, summary statistics of the past covariates, and the
/// incoming subject's covariate.
enum class CaraKind {
  kEth,          // indicator of the estimated better arm for this subject
  kZhangTarget,  // plays pi*(estimate, z) directly
  kZhangHu,      // covariate-adjusted doubly-adaptive coin
};

/// Running rho_n = n^-1 sum_i target(estimate, z_i) for the covariate-
/// adjusted coin. The definition re-evaluates past covariates under the
/// CURRENT estimate, so the tracker stores the covariates and recomputes
/// exactly whenever the target depends on the estimate; targets that ignore
/// the estimate take the O(1) incremental path.
class RhoTracker {
 public:
  explicit RhoTracker(TargetFunction target);

  void observe(double z, std::span<const double> params);
  double rho(std::span<const double> params) const;
  long size() const noexcept { return static_cast<long>(covariates_.size()); }

 private:
  TargetFunction target_;
  std::vector<double> covariates_;
  double running_sum_ = 0.0;  // valid only when the target ignores the estimate
};

class CaraRule {
 public:
  static CaraRule eth();
  static CaraRule zhang_target(TargetFunction target);
  static CaraRule zhang_hu(double nu, TargetFunction target);

  CaraKind kind() const noexcept { return kind_; }
  double nu() const noexcept { return nu_; }
  const TargetFunction& target() const;
  bool needs_estimates() const;

  /// Declare the rule linear in the covariate at its downcrossing, enabling
  /// the mean-covariate shortcut in solver-mode limits.
  CaraRule& declare_linear_in_covariate();
  bool linear_in_covariate() const noexcept { return linear_in_covariate_; }

  /// Probability of arm A for the incoming covariate. rho is consumed by the
  /// covariate-adjusted coin only. The ETH estimate layout is
  /// (muA, muB, betaA, betaB); ties at an exactly zero estimated difference
  /// get probability 1/2.
  double probability(double pi, std::span<const double> estimate, double z,
                     double rho = 0.5) const;

  /// The raw covariate-adjusted coin map phi(x; a, b).
  static double zhang_hu_map(double x, double a, double b, double nu);

 private:
  CaraRule() = default;

  CaraKind kind_ = CaraKind::kEth;
  double nu_ = 2.0;
  TargetFunction target_;
  bool has_target_ = false;
  bool linear_in_covariate_ = false;
};

/// Closed-form limit of the ETH indicator rule under the linear interaction
/// model with a standard normal covariate.
double eth_limit(const LinearInteractionModel& truth);

struct AveragedValue {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo average of the rule over fresh covariate draws at fixed
/// (pi, estimate, rho); the averaged allocation function of the convergence
/// theory.
AveragedValue averaged_rule(const CaraRule& rule, double pi, std::span<const double> estimate,
                            double rho, const CovariateModel& covariates, long samples, Rng& rng);

enum class CaraLimitMode { kClosedForm, kSolver };

struct CaraLimitResult {
  double value = 0.0;
  double std_error = 0.0;  // Monte Carlo error of the integration, when any
};

/// Limiting allocation at the true parameters. Closed-form mode integrates
/// the target over the covariate distribution (or applies the ETH formula);
/// solver mode bisects the averaged rule using common random numbers across
/// probes, or solves at the mean covariate when the rule is declared linear.
CaraLimitResult cara_limit(const CaraRule& rule, std::span<const double> true_params,
                           const CovariateModel& covariates, CaraLimitMode mode, long mc_samples,
                           Rng& rng);

}  // namespace allocsim
