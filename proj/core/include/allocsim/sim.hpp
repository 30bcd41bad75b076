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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "allocsim/design.hpp"
#include "allocsim/models.hpp"
#include "allocsim/state.hpp"
#include "allocsim/strata.hpp"

namespace allocsim {

/// One sequential trial: design, models, horizon, initial stage, seeding.
struct TrialConfig {
  DesignRule design = AaRule::complete_randomization();
  int arms = 2;
  long horizon = 0;           // N, total subjects
  int initial_per_arm = 0;    // m; forced permuted blocks before the rule runs
  std::optional<ResponseModel> response;
  std::optional<CovariateModel> covariates;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;   // replication index selects the stream
  int record_stride = 10;     // trajectory thinning; terminal step always kept

  /// Diagnostic knob for the martingale self-test: offset added to the
  /// arm-A probability used for the assignment draw only. The emitted
  /// probability (and so the martingale bookkeeping) is untouched, which is
  /// exactly the mismatch the residual must detect. Zero in normal use.
  double draw_fault = 0.0;
};

/// Design/model compatibility and run-parameter checks; throws ConfigError.
void validate(const TrialConfig& config);

/// Recorded pi_n path (per arm, and per stratum when stratified), estimate
/// snapshots, and the cumulative assignment-minus-probability martingale.
struct Trajectory {
  long horizon = 0;
  int arms = 2;
  std::vector<long> steps;
  std::vector<std::vector<double>> pi_path;          // [record][arm]
  std::vector<std::vector<double>> stratum_pi_path;  // [record][cell], NaN for empty cells
  std::vector<std::vector<double>> estimate_path;    // [record][param]; empty when unused
  std::vector<double> martingale_path;               // arm-A M_n at records

  std::vector<std::string> stratum_labels;  // "j:l" per cell, empty when not stratified

  AllocationState final_state{2};
  std::optional<StratumTable> final_table;
  std::vector<double> final_estimate;
  std::vector<double> final_martingale;  // per arm, M_N
};

Trajectory run_trial(const TrialConfig& config);

/// n^-1 M_N, maximized over arms (the two-arm martingales are mirror images).
/// The diagnostic certifies that realized assignments match the emitted
/// probabilities; it vanishes like N^{-1/2} when they do.
double martingale_residual(const Trajectory& trajectory);

/// Terminal statistics over independent replications.
struct ReplicationSummary {
  int replications = 0;
  int arms = 2;
  long horizon = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::vector<double>> final_pi;          // [rep][arm]
  std::vector<std::vector<double>> final_stratum_pi;  // [rep][cell]; empty when not stratified
  std::vector<std::vector<double>> final_margin_t;    // [rep][level] n^-1 D per T level
  std::vector<std::vector<double>> final_margin_w;
  std::vector<double> martingale_residuals;           // [rep]
  std::vector<std::string> stratum_labels;
};

/// R independent trials on streams 0..R-1 of base_seed, optionally fanned out
/// over worker threads (0 = hardware concurrency). Results are deterministic
/// in (config, base_seed) regardless of thread count. A failing trial aborts
/// the run with its replication index attached.
ReplicationSummary run_replications(const TrialConfig& config, int replications,
                                    std::uint64_t base_seed, int threads = 0);

/// The almost-sure limit operationalized at desk scale: error statistics of
/// the terminal proportions against a theoretical limit, with an explicit
/// (epsilon, coverage) pair rather than any claim of proof.
struct ConvergenceReport {
  double epsilon = 0.0;
  std::vector<double> limit;               // per arm
  std::vector<double> per_arm_mean_error;  // mean |pi_N - t| per arm
  double mean_abs_error = 0.0;             // mean over reps of the per-rep sup error
  double max_abs_error = 0.0;
  double fraction_within = 0.0;            // reps with sup error <= epsilon

  std::vector<double> stratum_limit;            // per cell, when stratified
  std::vector<double> stratum_mean_abs_error;   // per cell
  std::vector<double> stratum_fraction_within;  // per cell
  double mean_abs_martingale_residual = 0.0;
};

ConvergenceReport convergence_report(const ReplicationSummary& summary,
                                     std::span<const double> limit, double epsilon,
                                     std::span<const double> stratum_limit = {});

}  // namespace allocsim
