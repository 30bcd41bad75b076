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

#include <filesystem>
#include <ostream>
#include <string>

#include <json.hpp>

#include "allocsim/sim.hpp"

namespace allocsim {

inline constexpr int kSchemaVersion = 1;

/// Long-format trajectory rows, one per recorded step and arm (plus one per
/// stratum when stratified):
///   # schema_version=1
///   step,arm_or_stratum,pi,estimate_0,...,martingale
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

/// Same rows as a JSON document (schema_version, rows: [...]).
nlohmann::ordered_json trajectory_json(const Trajectory& trajectory);

/// Replication summary with optional convergence report and the resolved
/// experiment spec embedded for provenance.
nlohmann::ordered_json summary_json(const ReplicationSummary& summary,
                                    const ConvergenceReport* report,
                                    const nlohmann::ordered_json* resolved_spec);

/// Write-temp-then-rename; parents created. Throws ConfigError on I/O errors.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace allocsim
