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

#include <optional>
#include <variant>
#include <vector>

#include "allocsim/errors.hpp"

namespace allocsim {

/// One joint level (t_j, w_l) of two categorical covariates.
struct Stratum {
  int j = 0;
  int l = 0;
  bool operator==(const Stratum&) const = default;
};

/// A covariate observation: scalar for continuous models, a joint level pair
/// for categorical ones.
using Covariate = std::variant<double, Stratum>;

/// Running allocation counts over K arms. Counts are exact integers;
/// proportions are computed on demand and never cached as floats. Updates
/// return a new value, so snapshots can be shared read-only across threads.
class AllocationState {
 public:
  explicit AllocationState(int arm_count);

  int arm_count() const noexcept { return static_cast<int>(counts_.size()); }
  long step_count() const noexcept { return n_; }
  const std::vector<long>& counts() const noexcept { return counts_; }
  long count(int arm) const;

  /// One more assignment to `arm`.
  AllocationState updated(int arm) const;

  /// counts / n. Errors when n == 0 (the simulator's internal pi_0 = 0
  /// convention lives in the engine, not here).
  std::vector<double> proportions() const;
  double proportion(int arm) const;

  /// 2*counts[0] - n; two-arm states only. Its sign equals the sign of
  /// proportion(0) - 1/2 whenever n >= 1.
  long imbalance() const;

 private:
  std::vector<long> counts_;
  long n_ = 0;
};

struct AssignmentRecord {
  long step = 0;  // 1-based, strictly increasing within a history
  int arm = 0;
  std::optional<Covariate> covariate;
  std::optional<double> response;
};

/// Ordered assignment records plus the AllocationState they imply. The state
/// is maintained on append and always equals a replay of the records.
class TrialHistory {
 public:
  explicit TrialHistory(int arm_count);

  void append(AssignmentRecord record);

  const std::vector<AssignmentRecord>& records() const noexcept { return records_; }
  const AllocationState& state() const noexcept { return state_; }
  long size() const noexcept { return static_cast<long>(records_.size()); }

 private:
  std::vector<AssignmentRecord> records_;
  AllocationState state_;
};

}  // namespace allocsim
