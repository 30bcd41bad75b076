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
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "allocsim/sim.hpp"

namespace allocsim {

/// A declarative experiment: design kind and parameters, models, run
/// settings. Parsed from a sectioned key = value file ([design], [model],
/// [covariates], [run]) or from an equivalent JSON object, validated against
/// the design/model compatibility matrix before execution.
struct ExperimentSpec {
  TrialConfig config;
  int replications = 100;
  double epsilon = 0.05;
  int threads = 0;  // 0: hardware concurrency
  std::filesystem::path out_dir = "allocsim-out";
  std::string format = "csv";  // trajectory export: csv or json

  /// The fully resolved key/value document (post-overrides), embedded in
  /// every summary for provenance.
  nlohmann::ordered_json resolved;
};

/// Command-line overrides; set fields win over file values.
struct SpecOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<long> horizon;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
};

/// Parse the sectioned text format into a JSON document (scalars typed by
/// shape: numbers, booleans, strings; whitespace-separated lists of numbers
/// become arrays).
nlohmann::ordered_json parse_sectioned_spec(const std::string& text);

ExperimentSpec load_experiment(const std::filesystem::path& file,
                               const SpecOverrides& overrides = {});
ExperimentSpec experiment_from_json(nlohmann::ordered_json document,
                                    const SpecOverrides& overrides = {});

/// Subcommand bodies; the CLI binary is a thin argument-parsing wrapper.
/// Each returns a process exit code and writes human output to `out`,
/// diagnostics to `err`.
int cmd_simulate(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);
int cmd_limit(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);
int cmd_verify(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);
int cmd_list_designs(std::ostream& out);

}  // namespace allocsim
