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

#include "allocsim/designs_ra.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace allocsim {

double dbcd_power_map(double x, double y, double nu) {
  if (!(y > 0.0 && y < 1.0)) throw DomainError("dbcd_power_map: target outside (0,1)");
  if (!(nu >= 0.0)) throw DomainError("dbcd_power_map: nu must be nonnegative");
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  // log w1 - log w2 with w1 = y (y/x)^nu, w2 = (1-y) ((1-y)/(1-x))^nu.
  const double diff = std::log(y) - std::log1p(-y) +
                      nu * ((std::log(y) - std::log(x)) - (std::log1p(-y) - std::log1p(-x)));
  if (diff > 700.0) return 1.0;
  if (diff < -700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-diff));
}

namespace {

void check_dawd_function(const std::function<double(double)>& g, bool nondecreasing,
                         const char* name) {
  constexpr int kGrid = 33;
  if (std::abs(g(0.0) - 0.5) > 1e-9)
    throw DomainError(std::string("dawd: ") + name + "(0) must be 1/2");
  const double at_one = nondecreasing ? g(1.0) : g(-1.0);
  if (std::abs(at_one - 1.0) > 1e-9)
    throw DomainError(std::string("dawd: ") + name + " must reach 1 at its favoring end");
  double prev = nondecreasing ? -1.0 : 2.0;
  for (int i = 0; i < kGrid; ++i) {
    const double u = -1.0 + 2.0 * i / (kGrid - 1);
    const double v = g(u);
    if (!(v >= 0.0 && v <= 1.0))
      throw DomainError(std::string("dawd: ") + name + " outside [0,1] at u=" + std::to_string(u));
    if (std::abs(g(-u) - (1.0 - v)) > 1e-9)
      throw DomainError(std::string("dawd: ") + name + "(-u) = 1 - " + name + "(u) violated");
    if (nondecreasing ? (v < prev - 1e-9) : (v > prev + 1e-9))
      throw DomainError(std::string("dawd: ") + name + " violates its monotonicity condition");
    prev = v;
  }
}

}  // namespace

RaRule RaRule::dawd(double ethical_weight, std::function<double(double)> lean,
                    std::function<double(double)> pull) {
  if (!(ethical_weight >= 0.0 && ethical_weight < 1.0))
    throw DomainError("dawd: ethical weight must lie in [0,1)");
  if (!lean) lean = [](double u) { return (1.0 + u) / 2.0; };
  if (!pull) pull = [](double u) { return (1.0 - u) / 2.0; };
  check_dawd_function(lean, /*nondecreasing=*/true, "g1");
  check_dawd_function(pull, /*nondecreasing=*/false, "g2");
  RaRule rule;
  rule.kind_ = RaKind::kDawd;
  rule.rho_ = ethical_weight;
  rule.lean_ = std::move(lean);
  rule.pull_ = std::move(pull);
  return rule;
}

RaRule RaRule::dbcd(double nu, TargetFunction target) {
  if (!(nu >= 0.0)) throw DomainError("dbcd: nu must be nonnegative");
  RaRule rule;
  rule.kind_ = RaKind::kDbcd;
  rule.nu_ = nu;
  rule.target_ = std::move(target);
  rule.has_target_ = true;
  return rule;
}

RaRule RaRule::erade(double alpha, TargetFunction target) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("erade: alpha must lie in [0,1)");
  RaRule rule;
  rule.kind_ = RaKind::kErade;
  rule.alpha_ = alpha;
  rule.target_ = std::move(target);
  rule.has_target_ = true;
  return rule;
}

RaRule RaRule::power_rule(double tau, TargetFunction target) {
  if (!(tau >= 1.0)) throw DomainError("power_rule: tau must be >= 1");
  RaRule rule;
  rule.kind_ = RaKind::kPowerRule;
  rule.tau_ = tau;
  rule.target_ = std::move(target);
  rule.has_target_ = true;
  return rule;
}

RaRule RaRule::sml(TargetFunction target) {
  RaRule rule;
  rule.kind_ = RaKind::kSml;
  rule.target_ = std::move(target);
  rule.has_target_ = true;
  return rule;
}

const TargetFunction& RaRule::target() const {
  if (!has_target_) throw StateError("RaRule: rule has no target function");
  return target_;
}

double RaRule::probability(double pi, std::span<const double> estimate) const {
  if (kind_ == RaKind::kDawd) {
    if (estimate.size() < 2) throw DomainError("dawd: needs a (pA, pB) estimate");
    const double difference = estimate[0] - estimate[1];
    return rho_ * lean_(difference) + (1.0 - rho_) * pull_(2.0 * pi - 1.0);
  }
  return probability_from_target(pi, target_(estimate));
}

double RaRule::probability_from_target(double pi, double y) const {
  if (!(y > 0.0 && y < 1.0)) throw DomainError("RaRule: target value outside (0,1)");
  switch (kind_) {
    case RaKind::kDbcd:
      return dbcd_power_map(pi, y, nu_);
    case RaKind::kErade:
      // exact comparison: the tie branch is honored as written
      if (pi > y) return alpha_ * y;
      if (pi < y) return 1.0 - alpha_ * (1.0 - y);
      return y;
    case RaKind::kPowerRule:
      return pi > y ? std::pow(y, tau_) : std::pow(y, 1.0 / tau_);
    case RaKind::kSml:
      return y;
    case RaKind::kDawd:
      throw DomainError("dawd: reads the estimate difference, not a target value");
  }
  throw StateError("RaRule: unhandled kind");
}

double RaRule::limit(std::span<const double> true_params) const {
  if (kind_ == RaKind::kDawd) return find_downcrossing(allocation_map(true_params)).value();
  return target_(true_params);
}

ScalarMap RaRule::allocation_map(std::span<const double> estimate) const {
  std::vector<double> frozen(estimate.begin(), estimate.end());
  if (kind_ == RaKind::kDawd) {
    return {[rule = *this, frozen](double x) {
              return rule.probability(x, std::span<const double>(frozen));
            },
            true};
  }
  const double y = target_(estimate);
  return {[rule = *this, y](double x) { return rule.probability_from_target(x, y); }, true};
}

}  // namespace allocsim
