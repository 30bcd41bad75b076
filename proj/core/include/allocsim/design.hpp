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

#include <string>
#include <variant>
#include <vector>

#include "allocsim/designs_aa.hpp"
#include "allocsim/designs_cara.hpp"
#include "allocsim/designs_ra.hpp"
#include "allocsim/strata.hpp"

namespace allocsim {

using DesignRule = std::variant<AaRule, RaRule, CaraRule, StrataRule>;

/// Design classes by the information a rule may read when randomizing the
/// next subject: past assignments only; plus responses; plus covariates
/// including the incoming subject's; or everything.
enum class DesignClass { kAssignmentAdaptive, kResponseAdaptive, kCovariateAdaptive, kCara };

std::string to_string(DesignClass cls);

DesignClass design_class(const DesignRule& rule);

struct DesignInfo {
  std::string name;        // config kind, e.g. "efron"
  std::string display;     // catalogue name, e.g. "Efron"
  DesignClass cls;
  std::string parameters;  // parameter summary
  std::string description;
};

/// The built-in catalogue (custom library-level rules excluded).
const std::vector<DesignInfo>& design_catalog();

}  // namespace allocsim
