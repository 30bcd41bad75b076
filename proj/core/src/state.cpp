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

#include "allocsim/state.hpp"

#include <string>

namespace allocsim {

AllocationState::AllocationState(int arm_count) {
  if (arm_count < 2) throw DomainError("AllocationState: need at least two arms");
  counts_.assign(static_cast<std::size_t>(arm_count), 0);
}

long AllocationState::count(int arm) const {
  if (arm < 0 || arm >= arm_count())
    throw DomainError("AllocationState::count: arm " + std::to_string(arm) + " out of range");
  return counts_[static_cast<std::size_t>(arm)];
}

AllocationState AllocationState::updated(int arm) const {
  if (arm < 0 || arm >= arm_count())
    throw DomainError("AllocationState::updated: arm " + std::to_string(arm) +
                      " out of range for K=" + std::to_string(arm_count()));
  AllocationState next(*this);
  ++next.counts_[static_cast<std::size_t>(arm)];
  ++next.n_;
  return next;
}

std::vector<double> AllocationState::proportions() const {
  if (n_ == 0) throw StateError("AllocationState::proportions: undefined at n=0");
  std::vector<double> out(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i)
    out[i] = static_cast<double>(counts_[i]) / static_cast<double>(n_);
  return out;
}

double AllocationState::proportion(int arm) const {
  if (n_ == 0) throw StateError("AllocationState::proportion: undefined at n=0");
  return static_cast<double>(count(arm)) / static_cast<double>(n_);
}

long AllocationState::imbalance() const {
  if (arm_count() != 2)
    throw DomainError("AllocationState::imbalance: defined for two arms, K=" +
                      std::to_string(arm_count()));
  return 2 * counts_[0] - n_;
}

TrialHistory::TrialHistory(int arm_count) : state_(arm_count) {}

void TrialHistory::append(AssignmentRecord record) {
  if (!records_.empty() && record.step <= records_.back().step)
    throw DomainError("TrialHistory::append: step indices must be strictly increasing");
  state_ = state_.updated(record.arm);
  records_.push_back(std::move(record));
}

}  // namespace allocsim
