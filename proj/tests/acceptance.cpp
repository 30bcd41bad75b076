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
//
// Acceptance suite: one pass/fail line per criterion. Every tolerance is
// pinned here, in code. Monte Carlo runs use a fixed base seed, so the suite
// is deterministic; the martingale diagnostic runs at N = 1e5 where its
// threshold sits at ~12 standard deviations.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "allocsim/designs_cara.hpp"
#include "allocsim/downcrossing.hpp"
#include "allocsim/rng.hpp"
#include "allocsim/sim.hpp"
#include "allocsim/strata.hpp"
#include "allocsim/verify.hpp"

using namespace allocsim;

namespace {

// Default base seed; ALLOCSIM_ACCEPTANCE_SEED overrides it so the suite can
// be rerun under fresh randomness when auditing the tolerance margins.
const std::uint64_t kBaseSeed = [] {
  if (const char* env = std::getenv("ALLOCSIM_ACCEPTANCE_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != nullptr && *end == '\0') return static_cast<std::uint64_t>(v);
  }
  return std::uint64_t{20260808};
}();

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5g", v);
  return buf;
}

class Harness {
 public:
  void run(int id, const std::string& label, const std::function<void(Outcome&)>& body) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      body(outcome);
    } catch (const std::exception& e) {
      outcome.passed = false;
      outcome.note(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", outcome.passed ? "PASS" : "FAIL", id,
                label.c_str(), seconds, outcome.detail.empty() ? "" : " — ",
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.passed) ++failures_;
  }

  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

double mean_arm_error(const ReplicationSummary& summary, double limit, int arm = 0) {
  double total = 0.0;
  for (const auto& pi : summary.final_pi) total += std::abs(pi[arm] - limit);
  return total / static_cast<double>(summary.replications);
}

double fraction_within(const ReplicationSummary& summary, double limit, double eps) {
  long within = 0;
  for (const auto& pi : summary.final_pi)
    if (std::abs(pi[0] - limit) <= eps) ++within;
  return static_cast<double>(within) / static_cast<double>(summary.replications);
}

std::vector<double> stratum_mean_errors(const ReplicationSummary& summary,
                                        const std::vector<double>& limits) {
  std::vector<double> errors(limits.size(), 0.0);
  std::vector<long> counts(limits.size(), 0);
  for (const auto& cells : summary.final_stratum_pi)
    for (std::size_t c = 0; c < limits.size(); ++c) {
      if (std::isnan(cells[c])) continue;
      errors[c] += std::abs(cells[c] - limits[c]);
      ++counts[c];
    }
  for (std::size_t c = 0; c < limits.size(); ++c)
    if (counts[c] > 0) errors[c] /= static_cast<double>(counts[c]);
  return errors;
}

// ---------------------------------------------------------------------------
// The worked configurations of criteria 2-12, shared with the martingale
// diagnostic of criterion 13.
// ---------------------------------------------------------------------------

CovariateModel uniform_2x2() {
  return CategoricalCovariateModel{2, 2, {0.25, 0.25, 0.25, 0.25}};
}

TrialConfig cfg_efron(double p, long horizon) {
  TrialConfig c;
  c.design = AaRule::efron(p);
  c.horizon = horizon;
  c.seed = kBaseSeed;
  c.record_stride = horizon;
  return c;
}

TrialConfig cfg_extended(long horizon) {
  TrialConfig c = cfg_efron(0.75, horizon);
  c.design = AaRule::efron_extended(0.7, 0.5, 0.9);
  return c;
}

TrialConfig cfg_wei(long horizon) {
  TrialConfig c = cfg_efron(0.75, horizon);
  c.design = AaRule::wei_adaptive([](double u) { return (1.0 - u) / 2.0; });
  return c;
}

TrialConfig cfg_abcd(long horizon) {
  TrialConfig c = cfg_efron(0.75, horizon);
  c.design = AaRule::adjustable_bcd([](double x) { return 1.0 / (1.0 + std::exp(x)); });
  return c;
}

TrialConfig cfg_wei_multi(bool odds, long horizon) {
  TrialConfig c;
  c.design = odds ? AaRule::wei_multi_odds(3) : AaRule::wei_multi_linear(3);
  c.arms = 3;
  c.horizon = horizon;
  c.seed = kBaseSeed;
  c.record_stride = horizon;
  return c;
}

TrialConfig cfg_ra(const RaRule& rule, const BinaryModel& model, long horizon, int m) {
  TrialConfig c;
  c.design = rule;
  c.response = model;
  c.horizon = horizon;
  c.initial_per_arm = m;
  c.seed = kBaseSeed;
  c.record_stride = horizon;
  return c;
}

TrialConfig cfg_eth(long horizon) {
  TrialConfig c;
  c.design = CaraRule::eth();
  LinearInteractionModel model;
  model.mu_a = 0.0;
  model.mu_b = 1.0;
  model.beta_a = 1.0;
  model.beta_b = -1.0;
  model.noise_sd = 1.0;
  c.response = model;
  c.covariates = NormalCovariateModel{};
  c.horizon = horizon;
  c.initial_per_arm = 10;
  c.seed = kBaseSeed;
  c.record_stride = horizon;
  return c;
}

TrialConfig cfg_zhang_hu(long horizon) {
  TrialConfig c;
  c.design = CaraRule::zhang_hu(2.0, TargetFunction::constant(0.6));
  c.response = BinaryModel{0.7, 0.5};
  c.covariates = NormalCovariateModel{};
  c.horizon = horizon;
  c.initial_per_arm = 5;
  c.seed = kBaseSeed;
  c.record_stride = horizon;
  return c;
}

TrialConfig cfg_strata(const StrataRule& rule, long horizon) {
  TrialConfig c;
  c.design = rule;
  c.covariates = uniform_2x2();
  c.horizon = horizon;
  c.seed = kBaseSeed;
  c.record_stride = horizon;
  return c;
}

struct NamedConfig {
  std::string name;
  TrialConfig config;
};

std::vector<NamedConfig> martingale_roster(long horizon) {
  std::vector<NamedConfig> roster;
  roster.push_back({"efron", cfg_efron(0.75, horizon)});
  roster.push_back({"efron_extended", cfg_extended(horizon)});
  roster.push_back({"wei", cfg_wei(horizon)});
  roster.push_back({"abcd", cfg_abcd(horizon)});
  roster.push_back({"wei_multi_odds", cfg_wei_multi(true, horizon)});
  roster.push_back({"wei_multi_linear", cfg_wei_multi(false, horizon)});
  const BinaryModel binary{0.7, 0.5};
  roster.push_back(
      {"dbcd", cfg_ra(RaRule::dbcd(2.0, TargetFunction::neyman()), binary, horizon, 5)});
  roster.push_back(
      {"erade", cfg_ra(RaRule::erade(0.4, TargetFunction::neyman()), binary, horizon, 5)});
  roster.push_back({"dawd", cfg_ra(RaRule::dawd(0.5), BinaryModel{0.7, 0.3}, horizon, 5)});
  roster.push_back({"power",
                    cfg_ra(RaRule::power_rule(2.0, TargetFunction::constant(0.64)), binary,
                           horizon, 5)});
  roster.push_back({"eth", cfg_eth(horizon)});
  roster.push_back({"zhang_hu", cfg_zhang_hu(horizon)});
  roster.push_back({"pocock_simon", cfg_strata(StrataRule::pocock_simon(0.8), horizon)});
  roster.push_back(
      {"hu_hu", cfg_strata(StrataRule::hu_hu(0.8, {0.05, 0.1, 0.1, 0.75}), horizon)});
  roster.push_back({"atkinson", cfg_strata(StrataRule::atkinson(), horizon)});
  roster.push_back({"atkinson_general", cfg_strata(StrataRule::atkinson_general(true), horizon)});
  roster.push_back({"rdbcd", cfg_strata(StrataRule::rdbcd(2, 2, {0.4, 0.6, 0.5, 0.7}), horizon)});
  return roster;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

void criterion_1(Outcome& outcome) {
  const auto start = std::chrono::steady_clock::now();

  struct Case {
    std::function<double(double)> f;
    double expected;
  };
  const auto cardano = [](double p, double q) {
    const double s = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    return std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s);
  };
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  const std::vector<Case> analytic = {
      {[](double) { return 0.5; }, 0.5},
      {[](double) { return 0.1; }, 0.1},
      {[](double) { return 0.3; }, 0.3},
      {[](double) { return 0.62; }, 0.62},
      {[](double) { return 0.9; }, 0.9},
      {[](double x) { return 1.0 - x; }, 0.5},
      {[](double x) { return 1.0 - x * x; }, golden},
      {[](double x) { return 1.0 / (1.0 + x); }, golden},
      {[](double x) { return (1.0 - x) * (1.0 - x); }, (3.0 - std::sqrt(5.0)) / 2.0},
      {[](double x) { return std::exp(-x); }, 0.5671432904097838729999686622},
      {[](double x) { return 1.0 - x * x * x; }, cardano(1.0, -1.0)},
      {[](double x) { return 1.0 / (1.0 + x * x); }, cardano(1.0, -1.0)},
      {[](double x) { return (1.0 - x * x * x) / 2.0; }, cardano(2.0, -1.0)},
      {[](double x) { return (1.0 + std::cos(3.141592653589793 * x)) / 2.0; }, 0.5},
      {[](double x) { return 0.8 - 0.6 * x; }, 0.5},
      {[](double x) { return (2.0 - x) / 3.0; }, 0.5},
      {[](double x) { return 0.85 - 0.5 * x; }, 0.85 / 1.5},
      {[](double x) { return 0.75 - 0.25 * x; }, 0.6},
      {[](double x) { return 0.9 - 0.5 * x * x; }, -1.0 + std::sqrt(2.8)},
      {[](double x) { return 0.3 + 0.4 * (1.0 - x); }, 0.5},
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const DowncrossingResult r = find_downcrossing({analytic[i].f, true});
    const double err = std::abs(r.value() - analytic[i].expected);
    worst = std::max(worst, err);
    outcome.require(err <= 1e-10, "map " + std::to_string(i) + " off by " + fmt(err));
  }
  outcome.note("20 analytic maps, worst error " + fmt(worst));

  struct Step {
    AaRule rule;
    double expected;
  };
  const std::vector<Step> steps = {
      {AaRule::efron(0.6), 0.5},   {AaRule::efron(0.75), 0.5},
      {AaRule::efron(0.9), 0.5},   {AaRule::efron_extended(0.7, 0.5, 0.9), 0.7},
      {AaRule::aa_star(), 0.5},
  };
  for (const Step& s : steps) {
    const DowncrossingResult r = find_downcrossing(s.rule.allocation_map());
    outcome.require(r.kind == CrossingKind::kJump, "step rule not classified as a jump");
    outcome.require(std::abs(r.value() - s.expected) <= 1e-10,
                    "jump at " + fmt(r.value()) + " expected " + fmt(s.expected));
    outcome.require(r.bracket_width <= 1e-10, "bracket " + fmt(r.bracket_width));
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  outcome.require(seconds < 1.0, "runtime " + fmt(seconds) + "s exceeds 1s");
}

void criterion_2(Outcome& outcome) {
  const auto start = std::chrono::steady_clock::now();
  for (double p : {0.6, 0.75, 0.9}) {
    const ReplicationSummary summary = run_replications(cfg_efron(p, 5000), 500, kBaseSeed);
    const double mean_error = mean_arm_error(summary, 0.5);
    const double coverage = fraction_within(summary, 0.5, 0.05);
    outcome.require(mean_error < 0.01, "p=" + fmt(p) + " mean error " + fmt(mean_error));
    outcome.require(coverage >= 0.95, "p=" + fmt(p) + " coverage " + fmt(coverage));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  outcome.note("runtime " + fmt(seconds) + "s");
  outcome.require(seconds < 10.0, "runtime exceeds 10s");
}

void criterion_3(Outcome& outcome) {
  const ReplicationSummary summary = run_replications(cfg_extended(5000), 300, kBaseSeed);
  const double mean_error = mean_arm_error(summary, 0.7);
  outcome.require(mean_error < 0.015, "mean error " + fmt(mean_error));
  outcome.note("mean |pi_N - 0.7| = " + fmt(mean_error));
}

void criterion_4(Outcome& outcome) {
  const ReplicationSummary wei = run_replications(cfg_wei(5000), 300, kBaseSeed);
  const double wei_error = mean_arm_error(wei, 0.5);
  outcome.require(wei_error < 0.01, "adaptive coin mean error " + fmt(wei_error));

  const ReplicationSummary abcd = run_replications(cfg_abcd(5000), 300, kBaseSeed);
  const double abcd_error = mean_arm_error(abcd, 0.5);
  outcome.require(abcd_error < 0.01, "adjustable coin mean error " + fmt(abcd_error));

  long max_d = 0;
  for (const auto& pi : abcd.final_pi) {
    const long d = std::lround(5000.0 * (2.0 * pi[0] - 1.0));
    max_d = std::max(max_d, std::labs(d));
  }
  outcome.require(max_d <= 10, "max |D_N| = " + std::to_string(max_d));
  outcome.note("max |D_N| = " + std::to_string(max_d));
}

void criterion_5(Outcome& outcome) {
  for (bool odds : {true, false}) {
    const char* name = odds ? "odds" : "linear";
    const TrialConfig config = cfg_wei_multi(odds, 6000);
    const ReplicationSummary summary = run_replications(config, 200, kBaseSeed);
    for (int arm = 0; arm < 3; ++arm) {
      const double err = mean_arm_error(summary, 1.0 / 3.0, arm);
      outcome.require(err < 0.02,
                      std::string(name) + " arm " + std::to_string(arm) + " error " + fmt(err));
    }
    const std::vector<double> t = std::get<AaRule>(config.design).limit();
    for (double c : t)
      outcome.require(std::abs(c - 1.0 / 3.0) <= 1e-8,
                      std::string(name) + " solver component " + fmt(c));
  }
}

void criterion_6(Outcome& outcome) {
  const BinaryModel binary{0.7, 0.5};
  const double neyman = std::sqrt(0.7) / (std::sqrt(0.7) + std::sqrt(0.5));
  outcome.require(std::abs(neyman - 0.541963) < 1e-4, "pinned limit value drifted");

  const ReplicationSummary dbcd = run_replications(
      cfg_ra(RaRule::dbcd(2.0, TargetFunction::neyman()), binary, 8000, 5), 300, kBaseSeed);
  const double dbcd_error = mean_arm_error(dbcd, 0.541963);
  outcome.require(dbcd_error < 0.02, "dbcd mean error " + fmt(dbcd_error));

  const ReplicationSummary erade = run_replications(
      cfg_ra(RaRule::erade(0.4, TargetFunction::neyman()), binary, 8000, 5), 300, kBaseSeed);
  const double erade_error = mean_arm_error(erade, 0.541963);
  outcome.require(erade_error < 0.02, "erade mean error " + fmt(erade_error));

  const ReplicationSummary dawd = run_replications(
      cfg_ra(RaRule::dawd(0.5), BinaryModel{0.7, 0.3}, 8000, 5), 300, kBaseSeed);
  const double dawd_error = mean_arm_error(dawd, 0.566667);
  outcome.require(dawd_error < 0.02, "dawd mean error " + fmt(dawd_error));

  const ReplicationSummary power = run_replications(
      cfg_ra(RaRule::power_rule(2.0, TargetFunction::constant(0.64)), binary, 8000, 5), 300,
      kBaseSeed);
  const double power_error = mean_arm_error(power, 0.64);
  outcome.require(power_error < 0.02, "power-rule mean error " + fmt(power_error));

  outcome.note("mean errors: dbcd " + fmt(dbcd_error) + ", erade " + fmt(erade_error) +
               ", dawd " + fmt(dawd_error) + ", power " + fmt(power_error));
}

void criterion_7(Outcome& outcome) {
  const double limit = 1.0 - normal_cdf(0.5);
  outcome.require(std::abs(limit - 0.308538) < 1e-5, "pinned limit value drifted");

  const ReplicationSummary summary = run_replications(cfg_eth(10000), 300, kBaseSeed);
  const double mean_error = mean_arm_error(summary, 0.308538);
  outcome.require(mean_error < 0.03, "mean error " + fmt(mean_error));

  const std::vector<double> truth = {0.0, 1.0, 1.0, -1.0};
  Rng rng(kBaseSeed, 0xE7A);
  const CaraLimitResult closed = cara_limit(CaraRule::eth(), truth, NormalCovariateModel{},
                                            CaraLimitMode::kClosedForm, 100000, rng);
  const CaraLimitResult solved = cara_limit(CaraRule::eth(), truth, NormalCovariateModel{},
                                            CaraLimitMode::kSolver, 100000, rng);
  const double gap = std::abs(closed.value - solved.value);
  const double budget = 3.0 * std::max(solved.std_error, 1e-3);
  outcome.require(gap <= budget, "closed/solver gap " + fmt(gap) + " > " + fmt(budget));
  outcome.note("mean error " + fmt(mean_error) + ", closed/solver gap " + fmt(gap));
}

void criterion_8(Outcome& outcome) {
  const ReplicationSummary summary = run_replications(cfg_zhang_hu(8000), 300, kBaseSeed);
  const double mean_error = mean_arm_error(summary, 0.6);
  outcome.require(mean_error < 0.02, "mean error " + fmt(mean_error));

  double worst = 0.0;
  for (int i = 1; i < 50; ++i)
    for (int k = 1; k < 50; ++k) {
      const double y = i / 50.0, b = k / 50.0;
      worst = std::max(worst, std::abs(CaraRule::zhang_hu_map(y, y, b, 2.0) - b));
    }
  outcome.require(worst <= 1e-12, "fixed-point identity off by " + fmt(worst));
  outcome.note("mean error " + fmt(mean_error) + ", identity worst " + fmt(worst));
}

void criterion_9(Outcome& outcome) {
  const ReplicationSummary summary =
      run_replications(cfg_strata(StrataRule::pocock_simon(0.8), 4000), 300, kBaseSeed);
  const std::vector<double> errors = stratum_mean_errors(summary, {0.5, 0.5, 0.5, 0.5});
  double worst_stratum = 0.0;
  for (double e : errors) worst_stratum = std::max(worst_stratum, e);
  outcome.require(worst_stratum < 0.03, "worst stratum mean error " + fmt(worst_stratum));

  double worst_margin = 0.0;
  for (int level = 0; level < 2; ++level) {
    double mt = 0.0, mw = 0.0;
    for (int r = 0; r < summary.replications; ++r) {
      mt += std::abs(summary.final_margin_t[r][level]);
      mw += std::abs(summary.final_margin_w[r][level]);
    }
    worst_margin = std::max(worst_margin, mt / summary.replications);
    worst_margin = std::max(worst_margin, mw / summary.replications);
  }
  outcome.require(worst_margin < 0.02, "worst mean |margin| " + fmt(worst_margin));

  const std::vector<double> arm_limit = {0.5, 0.5};
  const std::vector<double> cell_limit = {0.5, 0.5, 0.5, 0.5};
  const ConvergenceReport report = convergence_report(summary, arm_limit, 0.05, cell_limit);
  for (double f : report.stratum_fraction_within)
    outcome.require(f >= 0.95, "stratum coverage " + fmt(f));
  outcome.note("worst stratum " + fmt(worst_stratum) + ", worst margin " + fmt(worst_margin));
}

void criterion_10(Outcome& outcome) {
  const ImbalanceWeights passing{0.05, 0.1, 0.1, 0.75};
  const ImbalanceWeights violating{0.25, 0.25, 0.25, 0.25};
  outcome.require(huhu_weight_condition(2, 2, passing), "weight condition should hold");
  outcome.require(!huhu_weight_condition(2, 2, violating), "weight condition should fail");

  for (const auto& [name, weights] : {std::pair{"passing", passing}, {"violating", violating}}) {
    const ReplicationSummary summary =
        run_replications(cfg_strata(StrataRule::hu_hu(0.8, weights), 4000), 300, kBaseSeed);
    const std::vector<double> errors = stratum_mean_errors(summary, {0.5, 0.5, 0.5, 0.5});
    for (double e : errors)
      outcome.require(e < 0.03, std::string(name) + " stratum mean error " + fmt(e));
  }
}

void criterion_11(Outcome& outcome) {
  // identical probabilities of the two algebraic routes on random tables
  Rng rng(kBaseSeed, 0xA7);
  const StrataRule stratified = StrataRule::atkinson();
  const StrataRule general = StrataRule::atkinson_general(true);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    StratumTable table(2, 2);
    AtkinsonAccumulator acc(2, 2, true);
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) {
        const int arm = rng.bernoulli(0.5) ? 0 : 1;
        table = table.updated({j, l}, arm);
        acc.add({j, l}, arm);
      }
    const long extra = 8 + static_cast<long>(rng.next_below(40));
    for (long i = 0; i < extra; ++i) {
      const Stratum s{static_cast<int>(rng.next_below(2)), static_cast<int>(rng.next_below(2))};
      const int arm = rng.bernoulli(0.5) ? 0 : 1;
      table = table.updated(s, arm);
      acc.add(s, arm);
    }
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l)
        worst_gap = std::max(worst_gap, std::abs(stratified.probability(table, {j, l}) -
                                                 general.probability(acc, {j, l})));
  }
  outcome.require(worst_gap <= 1e-9, "route gap " + fmt(worst_gap));

  for (const auto& [name, rule] :
       {std::pair<const char*, StrataRule>{"stratified", StrataRule::atkinson()},
        {"general", StrataRule::atkinson_general(true)}}) {
    const ReplicationSummary summary =
        run_replications(cfg_strata(rule, 4000), 200, kBaseSeed);
    const std::vector<double> errors = stratum_mean_errors(summary, {0.5, 0.5, 0.5, 0.5});
    for (double e : errors)
      outcome.require(e < 0.03, std::string(name) + " stratum mean error " + fmt(e));
  }
  outcome.note("closed-form vs regression route gap " + fmt(worst_gap));
}

void criterion_12(Outcome& outcome) {
  const std::vector<double> targets = {0.4, 0.6, 0.5, 0.7};
  const StrataRule rule = StrataRule::rdbcd(2, 2, targets);
  const ReplicationSummary summary = run_replications(cfg_strata(rule, 6000), 200, kBaseSeed);
  const std::vector<double> errors = stratum_mean_errors(summary, targets);
  double worst = 0.0;
  for (double e : errors) worst = std::max(worst, e);
  outcome.require(worst < 0.03, "worst stratum mean error " + fmt(worst));

  const double scalar_limit = rule.limit({0.25, 0.25, 0.25, 0.25}).overall;
  outcome.require(std::abs(scalar_limit - 0.55) <= 1e-12, "scalar limit " + fmt(scalar_limit));
  double mean_pi = 0.0;
  for (const auto& pi : summary.final_pi) mean_pi += pi[0] / summary.replications;
  outcome.require(std::abs(mean_pi - 0.55) < 0.02, "overall mean " + fmt(mean_pi));
  outcome.note("worst stratum " + fmt(worst) + ", overall mean " + fmt(mean_pi));
}

void criterion_13(Outcome& outcome) {
  // The design-by-design diagnostic at the documented scale N = 1e5.
  for (NamedConfig& entry : martingale_roster(100000)) {
    const ReplicationSummary summary = run_replications(entry.config, 50, kBaseSeed);
    long within = 0;
    for (double r : summary.martingale_residuals)
      if (std::abs(r) < 0.02) ++within;
    outcome.require(static_cast<double>(within) >= 0.99 * summary.replications,
                    entry.name + ": " + std::to_string(within) + "/50 within 0.02");
  }

  // fault injection: draws biased away from the emitted probabilities
  TrialConfig faulty;
  faulty.design = AaRule::complete_randomization();
  faulty.horizon = 100000;
  faulty.seed = kBaseSeed;
  faulty.record_stride = 100000;
  faulty.draw_fault = 0.1;
  const double residual = std::abs(martingale_residual(run_trial(faulty)));
  outcome.require(residual > 0.05, "fault injection residual " + fmt(residual));
  outcome.note("fault-injected residual " + fmt(residual));
}

void criterion_14(Outcome& outcome) {
  // probability range + sum-to-one fuzzing across the catalogue, 1e5 cases
  Rng rng(kBaseSeed, 0xF0);
  const std::vector<AaRule> aa_rules = {
      AaRule::complete_randomization(),
      AaRule::efron(0.8),
      AaRule::efron_extended(0.7, 0.5, 0.9),
      AaRule::wei_adaptive([](double u) { return (1.0 - u) / 2.0; }),
      AaRule::adjustable_bcd([](double x) { return 1.0 / (1.0 + std::exp(x)); }),
      AaRule::aa_star(),
  };
  long cases = 0;
  for (const AaRule& rule : aa_rules) {
    for (int i = 0; i < 10000; ++i) {
      AllocationState s(2);
      const long n = 1 + static_cast<long>(rng.next_below(500));
      for (long k = 0; k < n; ++k) s = s.updated(rng.bernoulli(0.45) ? 0 : 1);
      const std::vector<double> p = rule.probabilities(s);
      outcome.require(p[0] >= 0.0 && p[0] <= 1.0 && std::abs(p[0] + p[1] - 1.0) <= 1e-12,
                      "probability vector violation");
      ++cases;
      if (!outcome.passed) return;
    }
  }
  const std::vector<RaRule> ra_rules = {
      RaRule::dawd(0.5),
      RaRule::dbcd(2.0, TargetFunction::neyman()),
      RaRule::erade(0.4, TargetFunction::neyman()),
      RaRule::power_rule(2.0, TargetFunction::constant(0.64)),
      RaRule::sml(TargetFunction::constant(0.55)),
  };
  for (const RaRule& rule : ra_rules) {
    for (int i = 0; i < 8000; ++i) {
      const double x = rng.next_double();
      const std::vector<double> estimate = {0.02 + 0.96 * rng.next_double(),
                                            0.02 + 0.96 * rng.next_double()};
      const double v = rule.probability(x, estimate);
      outcome.require(v >= 0.0 && v <= 1.0, "ra probability out of range");
      ++cases;
      if (!outcome.passed) return;
    }
  }
  outcome.require(cases >= 100000, "only " + std::to_string(cases) + " fuzz cases");

  // declared-invariant grids for every built-in design
  const std::vector<DesignRule> designs = {
      AaRule::efron(0.75),
      AaRule::efron_extended(0.7, 0.5, 0.9),
      AaRule::wei_adaptive([](double u) { return (1.0 - u) / 2.0; }),
      AaRule::adjustable_bcd([](double x) { return 1.0 / (1.0 + std::exp(x)); }),
      AaRule::aa_star(),
      AaRule::wei_multi_odds(3),
      AaRule::wei_multi_linear(3),
      RaRule::dawd(0.5),
      RaRule::dbcd(2.0, TargetFunction::neyman()),
      RaRule::erade(0.4, TargetFunction::neyman()),
      RaRule::power_rule(2.0, TargetFunction::constant(0.64)),
      RaRule::sml(TargetFunction::constant(0.55)),
      CaraRule::eth(),
      CaraRule::zhang_target(TargetFunction::constant(0.55)),
      CaraRule::zhang_hu(2.0, TargetFunction::constant(0.6)),
      StrataRule::pocock_simon(0.8),
      StrataRule::hu_hu(0.8, {0.05, 0.1, 0.1, 0.75}),
      StrataRule::c_abcd(),
      StrataRule::atkinson(),
      StrataRule::atkinson_general(true),
      StrataRule::rdbcd(2, 2, {0.4, 0.6, 0.5, 0.7}),
  };
  for (const DesignRule& design : designs) {
    for (const PropertyCheck& check : verify_design(design, kBaseSeed)) {
      outcome.require(check.passed, check.name + (check.detail.empty() ? "" : ": " + check.detail));
      if (!outcome.passed) return;
    }
  }

  // imbalance identities on random tables
  Rng table_rng(kBaseSeed, 0xF1);
  for (int trial = 0; trial < 200; ++trial) {
    StratumTable table(2, 3);
    const long updates = 1 + static_cast<long>(table_rng.next_below(300));
    for (long i = 0; i < updates; ++i) {
      const Stratum s{static_cast<int>(table_rng.next_below(2)),
                      static_cast<int>(table_rng.next_below(3))};
      table = table.updated(s, table_rng.bernoulli(0.5) ? 0 : 1);
    }
    for (int j = 0; j < 2; ++j) {
      const double gap =
          std::abs(marginal_imbalance(table, MarginAxis::kT, j) -
                   static_cast<double>(table.margin_imbalance_t(j)) /
                       static_cast<double>(table.total()));
      outcome.require(gap <= 1e-9, "margin identity gap " + fmt(gap));
    }
    const double global_gap =
        std::abs(global_imbalance(table) - static_cast<double>(table.global_imbalance_count()) /
                                               static_cast<double>(table.total()));
    outcome.require(global_gap <= 1e-9, "global identity gap " + fmt(global_gap));
    if (!outcome.passed) return;
  }
  outcome.note(std::to_string(cases) + " fuzz cases, all grids green");
}

}  // namespace

int main() {
  Harness harness;
  harness.run(1, "downcrossing solver oracle suite", criterion_1);
  harness.run(2, "biased coin converges to balance at three bias levels", criterion_2);
  harness.run(3, "skewed coin converges to its 0.7 target", criterion_3);
  harness.run(4, "adaptive and adjustable coins balance; adjustable forces hard", criterion_4);
  harness.run(5, "three-arm balance rules and the vectorial solver", criterion_5);
  harness.run(6, "response-adaptive rules hit their targets", criterion_6);
  harness.run(7, "indicator rule hits the normal-CDF limit, both limit routes agree",
              criterion_7);
  harness.run(8, "covariate-adjusted coin hits a constant target; fixed-point identity",
              criterion_8);
  harness.run(9, "margin-sum minimization balances jointly and marginally", criterion_9);
  harness.run(10, "weighted-imbalance coin balances with and without the weight condition",
              criterion_10);
  harness.run(11, "regression coin: both algebraic routes, both converge", criterion_11);
  harness.run(12, "reinforced coin hits its per-stratum target table", criterion_12);
  harness.run(13, "martingale diagnostic across all designs; fault injection detected",
              criterion_13);
  harness.run(14, "property suites: ranges, monotonicity, symmetry, identities", criterion_14);

  if (harness.failures() == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", harness.failures());
  return 1;
}
