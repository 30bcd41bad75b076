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

#include "allocsim/design.hpp"

namespace allocsim {

std::string to_string(DesignClass cls) {
  switch (cls) {
    case DesignClass::kAssignmentAdaptive:
      return "AA";
    case DesignClass::kResponseAdaptive:
      return "RA";
    case DesignClass::kCovariateAdaptive:
      return "CA";
    case DesignClass::kCara:
      return "CARA";
  }
  return "?";
}

DesignClass design_class(const DesignRule& rule) {
  return std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, AaRule>) {
          return DesignClass::kAssignmentAdaptive;
        } else if constexpr (std::is_same_v<T, RaRule>) {
          return DesignClass::kResponseAdaptive;
        } else if constexpr (std::is_same_v<T, CaraRule>) {
          return DesignClass::kCara;
        } else {
          return r.kind() == StrataKind::kRdbcd ? DesignClass::kCara
                                                : DesignClass::kCovariateAdaptive;
        }
      },
      rule);
}

const std::vector<DesignInfo>& design_catalog() {
  static const std::vector<DesignInfo> catalog = {
      {"cr", "CR", DesignClass::kAssignmentAdaptive, "-",
       "complete randomization, fair coin every step"},
      {"efron", "Efron", DesignClass::kAssignmentAdaptive, "p in [1/2,1]",
       "biased coin favoring the under-represented arm"},
      {"efron_extended", "EfronExtended", DesignClass::kAssignmentAdaptive,
       "target, p1 <= target <= p2", "skewed biased coin converging to a chosen target"},
      {"wei", "Wei", DesignClass::kAssignmentAdaptive, "f on [-1,1]",
       "adaptive coin, continuous decreasing function of 2*pi-1"},
      {"abcd", "ABCD", DesignClass::kAssignmentAdaptive, "F on R",
       "adjustable biased coin on the integer imbalance D_n"},
      {"aa_star", "AAStar", DesignClass::kAssignmentAdaptive, "-",
       "one-sided favoring rule; asymmetric, still balances"},
      {"wei_multi_odds", "WeiMultiOdds", DesignClass::kAssignmentAdaptive, "K >= 2",
       "K-arm balance rule with reciprocal-odds weights"},
      {"wei_multi_linear", "WeiMultiLinear", DesignClass::kAssignmentAdaptive, "K >= 2",
       "K-arm balance rule, (1-pi_j)/(K-1) per arm"},
      {"dawd", "DAWD", DesignClass::kResponseAdaptive, "rho, g1, g2",
       "weighted mix of ethical lean and balance pull"},
      {"dbcd", "DBCD", DesignClass::kResponseAdaptive, "nu >= 0, target",
       "doubly-adaptive biased coin, power family"},
      {"erade", "ERADE", DesignClass::kResponseAdaptive, "alpha in [0,1), target",
       "discontinuous target-forcing coin, low variability"},
      {"power", "PowerRule", DesignClass::kResponseAdaptive, "tau >= 1, target",
       "target^tau above target, target^(1/tau) at or below"},
      {"sml", "SML", DesignClass::kResponseAdaptive, "target",
       "plays the estimated target directly"},
      {"eth", "ETH", DesignClass::kCara, "-",
       "indicator of the estimated better arm for the incoming subject"},
      {"zhang_target", "ZhangTarget", DesignClass::kCara, "target(params, z)",
       "plays the covariate-dependent estimated target"},
      {"zhang_hu", "ZhangHu", DesignClass::kCara, "nu >= 0, target",
       "covariate-adjusted doubly-adaptive coin"},
      {"pocock_simon", "PocockSimon", DesignClass::kCovariateAdaptive, "p in [1/2,1]",
       "minimization on the sum of margin imbalances"},
      {"hu_hu", "HuHu", DesignClass::kCovariateAdaptive, "p, weights (wg,wT,wW,ws)",
       "coin on a weighted global/margin/stratum imbalance"},
      {"c_abcd", "CABCD", DesignClass::kCovariateAdaptive, "q(.), optional known freqs",
       "per-stratum adjustable coin F^q on the stratum imbalance"},
      {"atkinson", "Atkinson", DesignClass::kCovariateAdaptive, "-",
       "regression-based coin, stratified closed form"},
      {"atkinson_general", "AtkinsonGeneral", DesignClass::kCovariateAdaptive,
       "interactions on/off", "regression-based coin on the running design matrix"},
      {"rdbcd", "RDBCD", DesignClass::kCara, "target table",
       "reinforced doubly-adaptive coin, per-stratum targets"},
  };
  return catalog;
}

}  // namespace allocsim
