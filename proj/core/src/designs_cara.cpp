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

#include "allocsim/designs_cara.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace allocsim {

RhoTracker::RhoTracker(TargetFunction target) : target_(std::move(target)) {}

void RhoTracker::observe(double z, std::span<const double> params) {
  covariates_.push_back(z);
  if (!target_.depends_on_params()) running_sum_ += target_(params, z);
}

double RhoTracker::rho(std::span<const double> params) const {
  if (covariates_.empty()) throw StateError("RhoTracker: no covariates observed yet");
  if (!target_.depends_on_params())
    return running_sum_ / static_cast<double>(covariates_.size());
  double sum = 0.0;
  for (double z : covariates_) sum += target_(params, z);
  return sum / static_cast<double>(covariates_.size());
}

CaraRule CaraRule::eth() {
  CaraRule rule;
  rule.kind_ = CaraKind::kEth;
  return rule;
}

CaraRule CaraRule::zhang_target(TargetFunction target) {
  CaraRule rule;
  rule.kind_ = CaraKind::kZhangTarget;
  rule.target_ = std::move(target);
  rule.has_target_ = true;
  return rule;
}

CaraRule CaraRule::zhang_hu(double nu, TargetFunction target) {
  if (!(nu >= 0.0)) throw DomainError("zhang_hu: nu must be nonnegative");
  CaraRule rule;
  rule.kind_ = CaraKind::kZhangHu;
  rule.nu_ = nu;
  rule.target_ = std::move(target);
  rule.has_target_ = true;
  return rule;
}

const TargetFunction& CaraRule::target() const {
  if (!has_target_) throw StateError("CaraRule: rule has no target function");
  return target_;
}

bool CaraRule::needs_estimates() const {
  if (kind_ == CaraKind::kEth) return true;
  return target_.depends_on_params();
}

CaraRule& CaraRule::declare_linear_in_covariate() {
  linear_in_covariate_ = true;
  return *this;
}

double CaraRule::probability(double pi, std::span<const double> estimate, double z,
                             double rho) const {
  switch (kind_) {
    case CaraKind::kEth: {
      if (estimate.size() < 4)
        throw DomainError("eth: needs a (muA, muB, betaA, betaB) estimate");
      const double difference = (estimate[0] - estimate[1]) + z * (estimate[2] - estimate[3]);
      if (difference > 0.0) return 1.0;
      if (difference < 0.0) return 0.0;
      return 0.5;
    }
    case CaraKind::kZhangTarget:
      return target_(estimate, z);
    case CaraKind::kZhangHu:
      return zhang_hu_map(pi, rho, target_(estimate, z), nu_);
  }
  throw StateError("CaraRule: unhandled kind");
}

double CaraRule::zhang_hu_map(double x, double a, double b, double nu) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("zhang_hu_map: running mean target outside (0,1)");
  if (!(b > 0.0 && b < 1.0)) throw DomainError("zhang_hu_map: target outside (0,1)");
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  // 1 / (1 + ((1-b)/b) * ((1-a)x / (a(1-x)))^nu), in log space.
  const double diff = std::log(b) - std::log1p(-b) +
                      nu * ((std::log(a) - std::log(x)) - (std::log1p(-a) - std::log1p(-x)));
  if (diff > 700.0) return 1.0;
  if (diff < -700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-diff));
}

double eth_limit(const LinearInteractionModel& truth) {
  if (truth.beta_a == truth.beta_b)
    throw NumericError("eth_limit: degenerate model, beta_a == beta_b");
  return 1.0 - normal_cdf((truth.mu_b - truth.mu_a) / std::abs(truth.beta_a - truth.beta_b));
}

AveragedValue averaged_rule(const CaraRule& rule, double pi, std::span<const double> estimate,
                            double rho, const CovariateModel& covariates, long samples, Rng& rng) {
  if (samples < 1) throw DomainError("averaged_rule: need at least one sample");
  if (!std::holds_alternative<NormalCovariateModel>(covariates))
    throw DomainError("averaged_rule: continuous covariate model required");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long i = 0; i < samples; ++i) {
    const double z = std::get<double>(sample_covariate(covariates, rng));
    const double v = rule.probability(pi, estimate, z, rho);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double variance = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(variance / n)};
}

CaraLimitResult cara_limit(const CaraRule& rule, std::span<const double> true_params,
                           const CovariateModel& covariates, CaraLimitMode mode, long mc_samples,
                           Rng& rng) {
  if (mc_samples < 1) throw DomainError("cara_limit: need at least one sample");
  if (!std::holds_alternative<NormalCovariateModel>(covariates))
    throw DomainError("cara_limit: continuous covariate model required");

  if (mode == CaraLimitMode::kClosedForm) {
    if (rule.kind() == CaraKind::kEth) {
      if (true_params.size() < 4) throw DomainError("cara_limit: eth needs four true parameters");
      LinearInteractionModel truth;
      truth.mu_a = true_params[0];
      truth.mu_b = true_params[1];
      truth.beta_a = true_params[2];
      truth.beta_b = true_params[3];
      return {eth_limit(truth), 0.0};
    }
    // E_Z[target(true params, Z)] by Monte Carlo integration.
    double sum = 0.0, sum_sq = 0.0;
    for (long i = 0; i < mc_samples; ++i) {
      const double z = std::get<double>(sample_covariate(covariates, rng));
      const double v = rule.target()(true_params, z);
      sum += v;
      sum_sq += v * v;
    }
    const double n = static_cast<double>(mc_samples);
    const double mean = sum / n;
    const double variance = std::max(0.0, sum_sq / n - mean * mean);
    return {mean, std::sqrt(variance / n)};
  }

  // Solver mode.
  if (rule.linear_in_covariate()) {
    // Mean-covariate shortcut: solve phi(x; gamma, E[f(Z)]) = x directly.
    double mean_z = 0.0;
    for (long i = 0; i < mc_samples; ++i)
      mean_z += std::get<double>(sample_covariate(covariates, rng));
    mean_z /= static_cast<double>(mc_samples);
    std::vector<double> frozen(true_params.begin(), true_params.end());
    ScalarMap map{[&rule, frozen, mean_z](double x) {
                    const double rho =
                        rule.kind() == CaraKind::kZhangHu ? std::clamp(x, 1e-9, 1.0 - 1e-9) : 0.5;
                    return rule.probability(x, std::span<const double>(frozen), mean_z, rho);
                  },
                  true};
    return {find_downcrossing(map, 1e-8).value(), 0.0};
  }

  // Common random numbers across probes of pi, so the bisection sees one
  // coherent nonincreasing function. The covariate-adjusted coin closes the
  // loop with rho = x: at its downcrossing the running mean target equals
  // the limiting proportion.
  std::vector<double> z_set(static_cast<std::size_t>(mc_samples));
  for (double& z : z_set) z = std::get<double>(sample_covariate(covariates, rng));
  std::vector<double> frozen(true_params.begin(), true_params.end());
  ScalarMap averaged{[&rule, &frozen, &z_set](double x) {
                       const double rho =
                           rule.kind() == CaraKind::kZhangHu ? std::clamp(x, 1e-9, 1.0 - 1e-9) : 0.5;
                       double sum = 0.0;
                       for (double z : z_set)
                         sum += rule.probability(x, std::span<const double>(frozen), z, rho);
                       return sum / static_cast<double>(z_set.size());
                     },
                     true};
  const DowncrossingResult solved = find_downcrossing(averaged, 1e-8);

  // Report the spread of the averaged values as the MC error scale.
  double sum = 0.0, sum_sq = 0.0;
  const double t = solved.value();
  const double rho = rule.kind() == CaraKind::kZhangHu ? t : 0.5;
  for (double z : z_set) {
    const double v = rule.probability(t, frozen, z, rho);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(mc_samples);
  const double mean = sum / n;
  const double variance = std::max(0.0, sum_sq / n - mean * mean);
  return {t, std::sqrt(variance / n)};
}

}  // namespace allocsim
