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

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "allocsim/experiment.hpp"

namespace {

// --threads wins, then ALLOCSIM_THREADS, then hardware concurrency.
int resolve_threads(int flag_value, bool flag_set) {
  if (flag_set) return flag_value;
  if (const char* env = std::getenv("ALLOCSIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != nullptr && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 0;
}

struct CommonFlags {
  std::string spec_file;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int reps = 0;
  bool reps_set = false;
  long horizon = 0;
  bool horizon_set = false;
  int threads = 0;
  bool threads_set = false;
  std::string out_dir;
  bool out_set = false;
  std::string format;
  bool format_set = false;

  allocsim::SpecOverrides overrides() const {
    allocsim::SpecOverrides o;
    if (seed_set) o.seed = seed;
    if (reps_set) o.replications = reps;
    if (horizon_set) o.horizon = horizon;
    o.threads = resolve_threads(threads, threads_set);
    if (out_set) o.out_dir = out_dir;
    if (format_set) o.format = format;
    return o;
  }
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_outputs) {
  cmd->add_option("spec", flags.spec_file, "experiment spec file (sectioned text or JSON)")
      ->required();
  cmd->add_option("--seed", flags.seed, "override the run seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--reps", flags.reps, "override the replication count")
      ->each([&flags](const std::string&) { flags.reps_set = true; });
  cmd->add_option("--horizon", flags.horizon, "override the trial horizon N")
      ->each([&flags](const std::string&) { flags.horizon_set = true; });
  cmd->add_option("--threads", flags.threads, "worker threads (default: ALLOCSIM_THREADS or cores)")
      ->each([&flags](const std::string&) { flags.threads_set = true; });
  if (with_outputs) {
    cmd->add_option("--out", flags.out_dir, "output directory")
        ->each([&flags](const std::string&) { flags.out_set = true; });
    cmd->add_option("--format", flags.format, "trajectory format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->each([&flags](const std::string&) { flags.format_set = true; });
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive allocation procedures: simulation, limits, verification"};
  app.require_subcommand(1);

  CommonFlags sim_flags, limit_flags, verify_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "run replications, write trajectory + summary");
  add_common_flags(simulate, sim_flags, /*with_outputs=*/true);
  CLI::App* limit = app.add_subcommand("limit", "print the design's theoretical limit");
  add_common_flags(limit, limit_flags, /*with_outputs=*/false);
  CLI::App* verify = app.add_subcommand("verify", "grid-check the design's declared properties");
  add_common_flags(verify, verify_flags, /*with_outputs=*/false);
  app.add_subcommand("list-designs", "print the design catalogue");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed())
      return allocsim::cmd_simulate(
          allocsim::load_experiment(sim_flags.spec_file, sim_flags.overrides()), std::cout,
          std::cerr);
    if (limit->parsed())
      return allocsim::cmd_limit(
          allocsim::load_experiment(limit_flags.spec_file, limit_flags.overrides()), std::cout,
          std::cerr);
    if (verify->parsed())
      return allocsim::cmd_verify(
          allocsim::load_experiment(verify_flags.spec_file, verify_flags.overrides()), std::cout,
          std::cerr);
    return allocsim::cmd_list_designs(std::cout);
  } catch (const allocsim::ConfigError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
