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

#include "allocsim/strata.hpp"

#include <cmath>
#include <string>

#include "allocsim/designs_ra.hpp"
#include "allocsim/linalg.hpp"

namespace allocsim {

StratumTable::StratumTable(int levels_t, int levels_w)
    : levels_t_(levels_t), levels_w_(levels_w) {
  if (levels_t < 1 || levels_w < 1) throw DomainError("StratumTable: invalid level counts");
  size_.assign(static_cast<std::size_t>(cells()), 0);
  arm_a_.assign(static_cast<std::size_t>(cells()), 0);
}

int StratumTable::index(Stratum s) const {
  if (s.j < 0 || s.j >= levels_t_ || s.l < 0 || s.l >= levels_w_)
    throw DomainError("StratumTable: stratum (" + std::to_string(s.j) + "," +
                      std::to_string(s.l) + ") out of range");
  return s.j * levels_w_ + s.l;
}

long StratumTable::size(Stratum s) const { return size_[static_cast<std::size_t>(index(s))]; }

long StratumTable::arm_a(Stratum s) const { return arm_a_[static_cast<std::size_t>(index(s))]; }

double StratumTable::proportion(Stratum s) const {
  const long count = size(s);
  if (count == 0) throw StateError("StratumTable::proportion: empty stratum");
  return static_cast<double>(arm_a(s)) / static_cast<double>(count);
}

StratumTable StratumTable::updated(Stratum s, int arm) const {
  if (arm != 0 && arm != 1) throw DomainError("StratumTable::updated: two arms only");
  StratumTable next(*this);
  const auto i = static_cast<std::size_t>(index(s));
  ++next.size_[i];
  if (arm == 0) ++next.arm_a_[i];
  ++next.n_;
  return next;
}

long StratumTable::stratum_imbalance(Stratum s) const {
  const auto i = static_cast<std::size_t>(index(s));
  return 2 * arm_a_[i] - size_[i];
}

long StratumTable::margin_imbalance_t(int j) const {
  if (j < 0 || j >= levels_t_) throw DomainError("StratumTable: t level out of range");
  long total = 0;
  for (int l = 0; l < levels_w_; ++l) total += stratum_imbalance({j, l});
  return total;
}

long StratumTable::margin_imbalance_w(int l) const {
  if (l < 0 || l >= levels_w_) throw DomainError("StratumTable: w level out of range");
  long total = 0;
  for (int j = 0; j < levels_t_; ++j) total += stratum_imbalance({j, l});
  return total;
}

long StratumTable::global_imbalance_count() const {
  long total = 0;
  for (std::size_t i = 0; i < size_.size(); ++i) total += 2 * arm_a_[i] - size_[i];
  return total;
}

std::vector<double> StratumTable::frequencies() const {
  if (n_ == 0) throw StateError("StratumTable::frequencies: empty table");
  std::vector<double> out(size_.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(size_[i]) / static_cast<double>(n_);
  return out;
}

double marginal_imbalance(const StratumTable& table, MarginAxis axis, int level) {
  if (table.total() == 0) throw StateError("marginal_imbalance: empty table");
  const double n = static_cast<double>(table.total());
  double sum = 0.0;
  if (axis == MarginAxis::kT) {
    for (int l = 0; l < table.levels_w(); ++l) {
      const Stratum s{level, l};
      if (table.empty(s)) continue;
      sum += (2.0 * table.proportion(s) - 1.0) * static_cast<double>(table.size(s)) / n;
    }
  } else {
    for (int j = 0; j < table.levels_t(); ++j) {
      const Stratum s{j, level};
      if (table.empty(s)) continue;
      sum += (2.0 * table.proportion(s) - 1.0) * static_cast<double>(table.size(s)) / n;
    }
  }
  return sum;
}

double global_imbalance(const StratumTable& table) {
  if (table.total() == 0) throw StateError("global_imbalance: empty table");
  return static_cast<double>(table.global_imbalance_count()) /
         static_cast<double>(table.total());
}

bool huhu_weight_condition(int levels_t, int levels_w, const ImbalanceWeights& weights) {
  if (levels_t < 1 || levels_w < 1) throw DomainError("huhu_weight_condition: invalid levels");
  const double j = levels_t - 1;
  const double l = levels_w - 1;
  return (j * l + j + l) * weights.global + j * weights.margin_w + l * weights.margin_t < 0.5;
}

AtkinsonAccumulator::AtkinsonAccumulator(int levels_t, int levels_w, bool interactions)
    : levels_t_(levels_t), levels_w_(levels_w), interactions_(interactions) {
  if (levels_t < 1 || levels_w < 1) throw DomainError("AtkinsonAccumulator: invalid levels");
  const int j = levels_t - 1;
  const int l = levels_w - 1;
  dim_ = 1 + j + l + (interactions ? j * l : 0);
  normal_.assign(static_cast<std::size_t>(dim_) * dim_, 0.0);
  imbalance_.assign(static_cast<std::size_t>(dim_), 0.0);
}

std::vector<double> AtkinsonAccumulator::feature(Stratum s) const {
  if (s.j < 0 || s.j >= levels_t_ || s.l < 0 || s.l >= levels_w_)
    throw DomainError("AtkinsonAccumulator: stratum out of range");
  std::vector<double> x(static_cast<std::size_t>(dim_), 0.0);
  x[0] = 1.0;
  int pos = 1;
  for (int j = 1; j < levels_t_; ++j, ++pos) x[static_cast<std::size_t>(pos)] = s.j == j ? 1.0 : 0.0;
  for (int l = 1; l < levels_w_; ++l, ++pos) x[static_cast<std::size_t>(pos)] = s.l == l ? 1.0 : 0.0;
  if (interactions_) {
    for (int j = 1; j < levels_t_; ++j)
      for (int l = 1; l < levels_w_; ++l, ++pos)
        x[static_cast<std::size_t>(pos)] = (s.j == j && s.l == l) ? 1.0 : 0.0;
  }
  return x;
}

void AtkinsonAccumulator::add(Stratum s, int arm) {
  if (arm != 0 && arm != 1) throw DomainError("AtkinsonAccumulator: two arms only");
  const std::vector<double> x = feature(s);
  const double sign = arm == 0 ? 1.0 : -1.0;
  for (int r = 0; r < dim_; ++r) {
    imbalance_[static_cast<std::size_t>(r)] += sign * x[static_cast<std::size_t>(r)];
    for (int c = 0; c < dim_; ++c)
      normal_[static_cast<std::size_t>(r * dim_ + c)] +=
          x[static_cast<std::size_t>(r)] * x[static_cast<std::size_t>(c)];
  }
  ++n_;
}

AtkinsonAccumulator::Prediction AtkinsonAccumulator::predicted_imbalance(Stratum s) const {
  const std::vector<double> x = feature(s);
  auto solved = linalg::solve(normal_, imbalance_, dim_, 1e-8);
  double value = 0.0;
  for (int i = 0; i < dim_; ++i)
    value += x[static_cast<std::size_t>(i)] * solved.x[static_cast<std::size_t>(i)];
  return {value, solved.used_ridge};
}

namespace {

double sign_coin(double p, double signed_imbalance) {
  if (signed_imbalance < 0.0) return p;
  if (signed_imbalance > 0.0) return 1.0 - p;
  return 0.5;
}

double regression_coin(double u) {
  const double under = 1.0 - u;
  const double over = 1.0 + u;
  return under * under / (under * under + over * over);
}

void check_coin_family(const std::function<double(double, Stratum)>& f) {
  Stratum s{0, 0};
  double prev = 2.0;
  for (int d = -16; d <= 16; ++d) {
    const double v = f(static_cast<double>(d), s);
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("c_abcd_custom: family value outside [0,1]");
    if (v > prev + 1e-9) throw DomainError("c_abcd_custom: family must be nonincreasing");
    if (std::abs(f(static_cast<double>(-d), s) - (1.0 - v)) > 1e-9)
      throw DomainError("c_abcd_custom: family must satisfy F(-x) = 1 - F(x)");
    prev = v;
  }
}

}  // namespace

StrataRule StrataRule::pocock_simon(double p) {
  if (!(p >= 0.5 && p <= 1.0)) throw DomainError("pocock_simon: bias p must lie in [1/2, 1]");
  StrataRule rule;
  rule.kind_ = StrataKind::kPocockSimon;
  rule.p_ = p;
  return rule;
}

StrataRule StrataRule::hu_hu(double p, ImbalanceWeights weights) {
  if (!(p >= 0.5 && p <= 1.0)) throw DomainError("hu_hu: bias p must lie in [1/2, 1]");
  const double total = weights.global + weights.margin_t + weights.margin_w + weights.stratum;
  if (weights.global < 0.0 || weights.margin_t < 0.0 || weights.margin_w < 0.0 ||
      weights.stratum < 0.0 || std::abs(total - 1.0) > 1e-9)
    throw DomainError("hu_hu: weights must be nonnegative and sum to 1");
  StrataRule rule;
  rule.kind_ = StrataKind::kHuHu;
  rule.p_ = p;
  rule.weights_ = weights;
  return rule;
}

StrataRule StrataRule::c_abcd(std::function<double(double)> q,
                              std::optional<std::vector<double>> known_freqs) {
  if (!q) q = [](double p) { return 1.0 / p; };
  if (known_freqs) {
    double total = 0.0;
    for (double p : *known_freqs) {
      if (!(p > 0.0)) throw DomainError("c_abcd: known frequencies must be positive");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("c_abcd: known frequencies must sum to 1");
  }
  StrataRule rule;
  rule.kind_ = StrataKind::kCAbcd;
  rule.q_ = std::move(q);
  rule.known_freqs_ = std::move(known_freqs);
  return rule;
}

StrataRule StrataRule::c_abcd_custom(std::function<double(double, Stratum)> family) {
  if (!family) throw DomainError("c_abcd_custom: empty family");
  check_coin_family(family);
  StrataRule rule;
  rule.kind_ = StrataKind::kCAbcd;
  rule.family_ = std::move(family);
  return rule;
}

StrataRule StrataRule::atkinson() {
  StrataRule rule;
  rule.kind_ = StrataKind::kAtkinson;
  return rule;
}

StrataRule StrataRule::atkinson_general(bool interactions) {
  StrataRule rule;
  rule.kind_ = StrataKind::kAtkinsonGeneral;
  rule.interactions_ = interactions;
  return rule;
}

StrataRule StrataRule::rdbcd(int levels_t, int levels_w, std::vector<double> target_table) {
  if (levels_t < 1 || levels_w < 1) throw DomainError("rdbcd: invalid levels");
  if (target_table.size() != static_cast<std::size_t>(levels_t) * levels_w)
    throw DomainError("rdbcd: target table size mismatch");
  for (double t : target_table)
    if (!(t > 0.0 && t < 1.0)) throw DomainError("rdbcd: targets must lie strictly inside (0,1)");
  StrataRule rule;
  rule.kind_ = StrataKind::kRdbcd;
  rule.levels_t_ = levels_t;
  rule.levels_w_ = levels_w;
  rule.targets_ = std::move(target_table);
  return rule;
}

double StrataRule::target(Stratum s) const {
  if (kind_ != StrataKind::kRdbcd) throw StateError("StrataRule::target: not a target rule");
  if (s.j < 0 || s.j >= levels_t_ || s.l < 0 || s.l >= levels_w_)
    throw DomainError("StrataRule::target: stratum out of range");
  return targets_[static_cast<std::size_t>(s.j * levels_w_ + s.l)];
}

int StrataRule::target_levels_t() const {
  if (kind_ != StrataKind::kRdbcd) throw StateError("StrataRule: not a target rule");
  return levels_t_;
}

int StrataRule::target_levels_w() const {
  if (kind_ != StrataKind::kRdbcd) throw StateError("StrataRule: not a target rule");
  return levels_w_;
}

double StrataRule::rdbcd_map(double x, double y, double z) {
  // z = 1 happens transiently when every subject so far shares one stratum;
  // the exponent is then 0 and the coin plays the target.
  if (!(z > 0.0 && z <= 1.0)) throw DomainError("rdbcd_map: stratum frequency outside (0,1]");
  return dbcd_power_map(x, y, (1.0 - z) / z);
}

double StrataRule::probability(const StratumTable& table, Stratum s) const {
  switch (kind_) {
    case StrataKind::kPocockSimon:
      return sign_coin(p_, static_cast<double>(table.margin_imbalance_t(s.j) +
                                               table.margin_imbalance_w(s.l)));
    case StrataKind::kHuHu: {
      const double weighted =
          weights_.global * static_cast<double>(table.global_imbalance_count()) +
          weights_.margin_t * static_cast<double>(table.margin_imbalance_t(s.j)) +
          weights_.margin_w * static_cast<double>(table.margin_imbalance_w(s.l)) +
          weights_.stratum * static_cast<double>(table.stratum_imbalance(s));
      return sign_coin(p_, weighted);
    }
    case StrataKind::kCAbcd: {
      const long d = table.empty(s) ? 0 : table.stratum_imbalance(s);
      if (family_) return family_(static_cast<double>(d), s);
      if (d == 0) return 0.5;
      double freq;
      if (known_freqs_) {
        freq = (*known_freqs_)[static_cast<std::size_t>(s.j * table.levels_w() + s.l)];
      } else {
        freq = static_cast<double>(table.size(s)) / static_cast<double>(table.total());
      }
      const double exponent = q_(freq);
      if (!(exponent > 0.0)) throw DomainError("c_abcd: q must be positive");
      const double magnitude = 1.0 / (std::pow(static_cast<double>(std::labs(d)), exponent) + 1.0);
      return d > 0 ? magnitude : 1.0 - magnitude;
    }
    case StrataKind::kAtkinson: {
      if (table.empty(s)) return 0.5;
      const double u = static_cast<double>(table.stratum_imbalance(s)) /
                       static_cast<double>(table.size(s));
      return regression_coin(u);
    }
    case StrataKind::kRdbcd: {
      if (table.empty(s)) return 0.5;
      if (table.total() == 0) return 0.5;
      const double freq =
          static_cast<double>(table.size(s)) / static_cast<double>(table.total());
      return rdbcd_map(table.proportion(s), target(s), freq);
    }
    case StrataKind::kAtkinsonGeneral:
      throw DomainError("StrataRule: regression form reads the accumulator overload");
  }
  throw StateError("StrataRule: unhandled kind");
}

double StrataRule::probability(const AtkinsonAccumulator& accumulator, Stratum s) const {
  if (kind_ != StrataKind::kAtkinsonGeneral)
    throw DomainError("StrataRule: only the regression form reads the accumulator");
  if (accumulator.total() == 0) return 0.5;
  return regression_coin(accumulator.predicted_imbalance(s).value);
}

StrataRule::Limit StrataRule::limit(const std::vector<double>& joint_probs) const {
  double total = 0.0;
  for (double p : joint_probs) {
    if (!(p > 0.0))
      throw DomainError("StrataRule::limit: every stratum needs probability > 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw DomainError("StrataRule::limit: joint probabilities must sum to 1");

  Limit out;
  if (kind_ == StrataKind::kRdbcd) {
    if (joint_probs.size() != targets_.size())
      throw DomainError("StrataRule::limit: distribution size does not match the target table");
    out.per_stratum = targets_;
  } else {
    out.per_stratum.assign(joint_probs.size(), 0.5);
  }
  for (std::size_t i = 0; i < joint_probs.size(); ++i)
    out.overall += out.per_stratum[i] * joint_probs[i];
  return out;
}

}  // namespace allocsim
