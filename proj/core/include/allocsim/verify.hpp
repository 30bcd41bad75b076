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

#include <cstdint>
#include <string>
#include <vector>

#include "allocsim/design.hpp"
#include "allocsim/downcrossing.hpp"

namespace allocsim {

struct PropertyCheck {
  std::string name;
  bool passed = true;
  std::string detail;  // witness points on failure
};

inline bool all_passed(const std::vector<PropertyCheck>& checks) {
  for (const PropertyCheck& c : checks)
    if (!c.passed) return false;
  return true;
}

/// Range and monotonicity of a raw allocation map on a grid; failures carry
/// witness coordinates. This is the check cmd_verify runs and what the
/// fault-injection tests feed deliberately broken maps.
PropertyCheck check_map_range(const ScalarMap& map, int grid = 257);
PropertyCheck check_map_monotone(const ScalarMap& map, int grid = 257);

/// The full declared-invariant bundle for a design: probability range and
/// sum-to-one under random states, monotonicity in the allocation proportion,
/// kind-specific symmetry/identity conditions, and downcrossing verification
/// where a limit is computable without model parameters.
std::vector<PropertyCheck> verify_design(const DesignRule& design, std::uint64_t seed = 20260808);

}  // namespace allocsim
