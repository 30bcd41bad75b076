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
#include <optional>
#include <vector>

#include "allocsim/state.hpp"

namespace allocsim {

/// Per-stratum counts over two categorical covariates with levels_t x
/// levels_w joint levels: total size and arm-A count per cell. Two arms.
class StratumTable {
 public:
  StratumTable(int levels_t, int levels_w);

  int levels_t() const noexcept { return levels_t_; }
  int levels_w() const noexcept { return levels_w_; }
  int cells() const noexcept { return levels_t_ * levels_w_; }
  long total() const noexcept { return n_; }

  long size(Stratum s) const;   // N(j,l)
  long arm_a(Stratum s) const;  // arm-A count within the stratum
  bool empty(Stratum s) const { return size(s) == 0; }
  double proportion(Stratum s) const;  // arm_a / size; errors on empty cells

  StratumTable updated(Stratum s, int arm) const;  // arm 0 is A

  /// Integer imbalances: stratum D(j,l) = 2*armA - size, covariate-margin and
  /// global analogues. Sign decisions in the rules use these, never floats.
  long stratum_imbalance(Stratum s) const;
  long margin_imbalance_t(int j) const;
  long margin_imbalance_w(int l) const;
  long global_imbalance_count() const;

  std::vector<double> frequencies() const;  // empirical p(j,l); errors when empty

 private:
  int index(Stratum s) const;
  int levels_t_;
  int levels_w_;
  long n_ = 0;
  std::vector<long> size_;
  std::vector<long> arm_a_;
};

enum class MarginAxis { kT, kW };

/// n^-1 D for one margin level: the frequency-weighted sum of per-stratum
/// proportion imbalances along the level. Empty cells contribute zero. Equals
/// the integer margin imbalance divided by n.
double marginal_imbalance(const StratumTable& table, MarginAxis axis, int level);

/// 2*pi_n - 1; equals the frequency-weighted sum over all cells.
double global_imbalance(const StratumTable& table);

struct ImbalanceWeights {
  double global = 0.0;
  double margin_t = 0.0;
  double margin_w = 0.0;
  double stratum = 1.0;
};

/// The sufficient condition of the Markov-chain balance analysis:
/// (J*L + J + L)*wg + J*wW + L*wT < 1/2 with J = levels_t - 1 and
/// L = levels_w - 1. Advisory only: convergence to balance holds for any
/// valid weights.
bool huhu_weight_condition(int levels_t, int levels_w, const ImbalanceWeights& weights);

/// Running design-matrix accumulator for the regression-based coin: normal
/// matrix M = sum x x^t and imbalance vector b = sum (2*delta - 1) x over the
/// assigned subjects, with x = (1, dummies, optional interactions). Singular
/// early-stage solves fall back to a 1e-8 ridge and are flagged.
class AtkinsonAccumulator {
 public:
  AtkinsonAccumulator(int levels_t, int levels_w, bool interactions);

  void add(Stratum s, int arm);

  struct Prediction {
    double value = 0.0;  // x^t M^{-1} b for the incoming stratum
    bool used_ridge = false;
  };
  Prediction predicted_imbalance(Stratum s) const;
  long total() const noexcept { return n_; }

 private:
  std::vector<double> feature(Stratum s) const;
  int levels_t_;
  int levels_w_;
  bool interactions_;
  int dim_;
  long n_ = 0;
  std::vector<double> normal_;  // dim x dim
  std::vector<double> imbalance_;
};

/// Covariate-adaptive (and covariate-adjusted response-adaptive) rules over
/// categorical strata.
enum class StrataKind {
  kPocockSimon,      // margin-sum minimization coin
  kHuHu,             // weighted global/margin/stratum imbalance coin
  kCAbcd,            // per-stratum adjustable coin F_jl(D(j,l))
  kAtkinson,         // stratified regression coin, closed form
  kAtkinsonGeneral,  // regression coin on the running design matrix
  kRdbcd,            // per-stratum target-forcing coin
};

class StrataRule {
 public:
  static StrataRule pocock_simon(double p);
  static StrataRule hu_hu(double p, ImbalanceWeights weights);
  /// F^q family with exponent q(p_jl): q decreasing, q(0+) = infinity.
  /// Known joint frequencies may be supplied; otherwise the running estimates
  /// are used. Default q(p) = 1/p.
  static StrataRule c_abcd(std::function<double(double)> q = {},
                           std::optional<std::vector<double>> known_freqs = std::nullopt);
  /// Custom per-stratum coin family F(D, stratum); must be nonincreasing with
  /// F(-x) = 1 - F(x) (grid-checked).
  static StrataRule c_abcd_custom(std::function<double(double, Stratum)> family);
  static StrataRule atkinson();
  static StrataRule atkinson_general(bool interactions);
  /// Per-stratum targets, row-major levels_t x levels_w, strictly in (0,1).
  static StrataRule rdbcd(int levels_t, int levels_w, std::vector<double> target_table);

  StrataKind kind() const noexcept { return kind_; }
  bool uses_accumulator() const noexcept { return kind_ == StrataKind::kAtkinsonGeneral; }
  bool accumulator_interactions() const noexcept { return interactions_; }
  double target(Stratum s) const;  // rdbcd table lookup
  int target_levels_t() const;     // rdbcd table dimensions
  int target_levels_w() const;

  /// Probability of arm A for a subject arriving in stratum s. First arrival
  /// in an empty stratum gets 1/2 under the stratified kinds.
  double probability(const StratumTable& table, Stratum s) const;
  double probability(const AtkinsonAccumulator& accumulator, Stratum s) const;

  /// The reinforced coin map phi(x; y, z): doubly-adaptive power map with
  /// exponent nu(z) = (1-z)/z, so sparse strata force harder.
  static double rdbcd_map(double x, double y, double z);

  struct Limit {
    std::vector<double> per_stratum;  // row-major
    double overall = 0.0;             // joint-probability-weighted average
  };
  /// Theoretical limits under a known joint covariate distribution (all
  /// entries positive). Balance rules converge to 1/2 in every stratum; the
  /// reinforced coin to its target table.
  Limit limit(const std::vector<double>& joint_probs) const;

 private:
  StrataRule() = default;

  StrataKind kind_ = StrataKind::kPocockSimon;
  double p_ = 0.5;
  ImbalanceWeights weights_;
  std::function<double(double)> q_;
  std::function<double(double, Stratum)> family_;
  std::optional<std::vector<double>> known_freqs_;
  bool interactions_ = true;
  int levels_t_ = 2;
  int levels_w_ = 2;
  std::vector<double> targets_;
};

}  // namespace allocsim
