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

#include "allocsim/designs_aa.hpp"

#include <cmath>
#include <string>

namespace allocsim {

namespace {

// Construction-time grid checks for user-supplied rule functions. These are
// parameter invariants of the rule kinds, unlike ScalarMap's monotonicity
// claim which the solver checks on use.
void check_wei_function(const std::function<double(double)>& f) {
  if (!f) throw DomainError("wei_adaptive: empty function");
  constexpr int kGrid = 33;
  double prev = 2.0;
  for (int i = 0; i < kGrid; ++i) {
    const double u = -1.0 + 2.0 * i / (kGrid - 1);
    const double v = f(u);
    if (!(v >= 0.0 && v <= 1.0))
      throw DomainError("wei_adaptive: f(" + std::to_string(u) + ") outside [0,1]");
    if (v > prev + 1e-9)
      throw DomainError("wei_adaptive: f must be nonincreasing (violated at u=" +
                        std::to_string(u) + ")");
    if (std::abs(f(-u) - (1.0 - v)) > 1e-9)
      throw DomainError("wei_adaptive: f(-u) = 1 - f(u) violated at u=" + std::to_string(u));
    prev = v;
  }
}

void check_adjustable_function(const std::function<double(double)>& f) {
  if (!f) throw DomainError("adjustable_bcd: empty function");
  double prev = 2.0;
  for (int d = -24; d <= 24; ++d) {
    const double x = d / 2.0;
    const double v = f(x);
    if (!(v >= 0.0 && v <= 1.0))
      throw DomainError("adjustable_bcd: F(" + std::to_string(x) + ") outside [0,1]");
    if (v > prev + 1e-9)
      throw DomainError("adjustable_bcd: F must be nonincreasing (violated at x=" +
                        std::to_string(x) + ")");
    if (std::abs(f(-x) - (1.0 - v)) > 1e-9)
      throw DomainError("adjustable_bcd: F(-x) = 1 - F(x) violated at x=" + std::to_string(x));
    prev = v;
  }
}

std::vector<double> two_arm(double phi) { return {phi, 1.0 - phi}; }

}  // namespace

AaRule AaRule::complete_randomization() {
  AaRule rule;
  rule.kind_ = AaKind::kCompleteRandomization;
  return rule;
}

AaRule AaRule::efron(double p) {
  if (!(p >= 0.5 && p <= 1.0)) throw DomainError("efron: bias p must lie in [1/2, 1]");
  AaRule rule;
  rule.kind_ = AaKind::kEfron;
  rule.p_ = p;
  return rule;
}

AaRule AaRule::efron_extended(double target, double p1, double p2) {
  if (!(0.0 <= p1 && p1 <= target && target <= p2 && p2 <= 1.0))
    throw DomainError("efron_extended: need 0 <= p1 <= target <= p2 <= 1");
  if (p1 == target && target == p2)
    throw DomainError("efron_extended: at least one inequality must be strict");
  AaRule rule;
  rule.kind_ = AaKind::kEfronExtended;
  rule.target_ = target;
  rule.p1_ = p1;
  rule.p2_ = p2;
  return rule;
}

AaRule AaRule::wei_adaptive(std::function<double(double)> f) {
  check_wei_function(f);
  AaRule rule;
  rule.kind_ = AaKind::kWeiAdaptive;
  rule.f_ = std::move(f);
  return rule;
}

AaRule AaRule::adjustable_bcd(std::function<double(double)> big_f) {
  check_adjustable_function(big_f);
  AaRule rule;
  rule.kind_ = AaKind::kAdjustableBcd;
  rule.f_ = std::move(big_f);
  return rule;
}

AaRule AaRule::aa_star() {
  AaRule rule;
  rule.kind_ = AaKind::kAaStar;
  return rule;
}

AaRule AaRule::wei_multi_odds(int arms) {
  if (arms < 2) throw DomainError("wei_multi_odds: need at least two arms");
  AaRule rule;
  rule.kind_ = AaKind::kWeiMultiOdds;
  rule.arms_ = arms;
  return rule;
}

AaRule AaRule::wei_multi_linear(int arms) {
  if (arms < 2) throw DomainError("wei_multi_linear: need at least two arms");
  AaRule rule;
  rule.kind_ = AaKind::kWeiMultiLinear;
  rule.arms_ = arms;
  return rule;
}

AaRule AaRule::custom(ScalarMap map) {
  if (!map.eval) throw DomainError("custom: empty allocation map");
  AaRule rule;
  rule.kind_ = AaKind::kCustom;
  rule.custom_ = std::move(map);
  return rule;
}

std::vector<double> AaRule::probabilities(const AllocationState& state) const {
  if (state.arm_count() != arms_)
    throw DomainError("AaRule: rule arity " + std::to_string(arms_) +
                      " does not match state arity " + std::to_string(state.arm_count()));
  if (kind_ == AaKind::kCompleteRandomization) return two_arm(0.5);
  if (state.step_count() == 0)
    throw StateError("AaRule: rule reads the allocation proportion and the state is empty");

  switch (kind_) {
    case AaKind::kEfron: {
      const long d = state.imbalance();
      if (d < 0) return two_arm(p_);
      if (d == 0) return two_arm(0.5);
      return two_arm(1.0 - p_);
    }
    case AaKind::kEfronExtended: {
      // Tie branch pi_n == target is decided on the counts: n*target must be
      // (numerically) an integer equal to the arm-A count. Non-integer
      // crossings fold into the "above" branch; they have measure zero.
      const double scaled = static_cast<double>(state.step_count()) * target_;
      const double count_a = static_cast<double>(state.count(0));
      if (std::abs(scaled - count_a) < 1e-9) return two_arm(target_);
      if (count_a < scaled) return two_arm(p2_);
      return two_arm(p1_);
    }
    case AaKind::kWeiAdaptive:
      return two_arm(f_(2.0 * state.proportion(0) - 1.0));
    case AaKind::kAdjustableBcd:
      return two_arm(f_(static_cast<double>(state.imbalance())));
    case AaKind::kAaStar:
      // x <= 1/2 favors A outright; exact on the integer imbalance.
      return two_arm(state.imbalance() <= 0 ? 1.0 : 0.5);
    case AaKind::kWeiMultiOdds: {
      std::vector<double> odds(static_cast<std::size_t>(arms_));
      double total = 0.0;
      for (int a = 0; a < arms_; ++a) {
        if (state.count(a) == 0)
          throw StateError("wei_multi_odds: every arm needs at least one assignment");
        const double pi = state.proportion(a);
        odds[static_cast<std::size_t>(a)] = 1.0 / pi - 1.0;
        total += odds[static_cast<std::size_t>(a)];
      }
      if (!(total > 0.0))
        throw StateError("wei_multi_odds: degenerate proportions");
      for (double& o : odds) o /= total;
      return odds;
    }
    case AaKind::kWeiMultiLinear: {
      std::vector<double> probs(static_cast<std::size_t>(arms_));
      for (int a = 0; a < arms_; ++a)
        probs[static_cast<std::size_t>(a)] =
            (1.0 - state.proportion(a)) / static_cast<double>(arms_ - 1);
      return probs;
    }
    case AaKind::kCustom: {
      const double v = custom_.eval(state.proportion(0));
      if (!(v >= 0.0 && v <= 1.0))
        throw DomainError("custom rule returned a value outside [0,1]");
      return two_arm(v);
    }
    default:
      throw StateError("AaRule: unhandled kind");
  }
}

ScalarMap AaRule::allocation_map(long step) const {
  switch (kind_) {
    case AaKind::kCompleteRandomization:
      return {[](double) { return 0.5; }, true};
    case AaKind::kEfron: {
      const double p = p_;
      return {[p](double x) { return x < 0.5 ? p : (x > 0.5 ? 1.0 - p : 0.5); }, true};
    }
    case AaKind::kEfronExtended: {
      const double t = target_, p1 = p1_, p2 = p2_;
      return {[t, p1, p2](double x) { return x < t ? p2 : (x > t ? p1 : t); }, true};
    }
    case AaKind::kWeiAdaptive: {
      auto f = f_;
      return {[f](double x) { return f(2.0 * x - 1.0); }, true};
    }
    case AaKind::kAdjustableBcd: {
      auto f = f_;
      const double n = static_cast<double>(step);
      return {[f, n](double x) { return f(n * (2.0 * x - 1.0)); }, true};
    }
    case AaKind::kAaStar:
      return {[](double x) { return x <= 0.5 ? 1.0 : 0.5; }, true};
    case AaKind::kCustom:
      return custom_;
    default:
      throw DomainError("AaRule::allocation_map: multi-arm rule; use allocation_map_multi");
  }
}

VectorMap AaRule::allocation_map_multi() const {
  const int k = arms_;
  switch (kind_) {
    case AaKind::kWeiMultiOdds:
      return {[k](const std::vector<double>& x) {
                std::vector<double> odds(static_cast<std::size_t>(k));
                double total = 0.0;
                for (int a = 0; a < k; ++a) {
                  const double xa = x[static_cast<std::size_t>(a)];
                  if (!(xa > 0.0))
                    throw DomainError("wei_multi_odds map: proportion must be positive");
                  odds[static_cast<std::size_t>(a)] = 1.0 / xa - 1.0;
                  total += odds[static_cast<std::size_t>(a)];
                }
                if (!(total > 0.0)) throw DomainError("wei_multi_odds map: zero total odds");
                for (double& o : odds) o /= total;
                return odds;
              },
              k};
    case AaKind::kWeiMultiLinear:
      return {[k](const std::vector<double>& x) {
                std::vector<double> out(static_cast<std::size_t>(k));
                for (int a = 0; a < k; ++a)
                  out[static_cast<std::size_t>(a)] =
                      (1.0 - x[static_cast<std::size_t>(a)]) / static_cast<double>(k - 1);
                return out;
              },
              k};
    default:
      throw DomainError("AaRule::allocation_map_multi: two-arm rule; use allocation_map");
  }
}

std::vector<double> AaRule::limit() const {
  switch (kind_) {
    case AaKind::kAdjustableBcd:
      // Every member of the step-indexed family shares the same downcrossing.
      return {0.5, 0.5};
    case AaKind::kWeiMultiOdds:
    case AaKind::kWeiMultiLinear:
      return find_vectorial_downcrossing(allocation_map_multi()).point;
    default: {
      const double t = find_downcrossing(allocation_map()).value();
      return {t, 1.0 - t};
    }
  }
}

DowncrossingResult AaRule::limit_diagnostics() const {
  switch (kind_) {
    case AaKind::kWeiMultiOdds:
    case AaKind::kWeiMultiLinear:
      return find_vectorial_downcrossing(allocation_map_multi());
    case AaKind::kAdjustableBcd:
      return find_downcrossing(allocation_map(1));
    default:
      return find_downcrossing(allocation_map());
  }
}

}  // namespace allocsim
