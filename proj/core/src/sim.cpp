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

#include "allocsim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "allocsim/linalg.hpp"
#include "allocsim/rng.hpp"

namespace allocsim {

namespace {

// ---------------------------------------------------------------------------
// Running estimates. OLS and frequency estimates depend on the data only
// through sufficient statistics, so streaming accumulation reproduces the
// full-history estimate at every step without O(n) recomputation.
// ---------------------------------------------------------------------------

class EstimateTracker {
 public:
  explicit EstimateTracker(const ResponseModel& model) {
    if (std::holds_alternative<BinaryModel>(model)) {
      shape_ = Shape::kBinary;
    } else if (std::holds_alternative<LinearInteractionModel>(model)) {
      shape_ = Shape::kInteraction;
    } else {
      shape_ = Shape::kCommonSlope;
      const auto& m = std::get<LinearCommonSlopeModel>(model);
      feature_ = m.feature_map ? m.feature_map
                               : [](double z) { return std::vector<double>{z}; };
      dim_ = 2 + static_cast<int>(m.beta.size());
      normal_.assign(static_cast<std::size_t>(dim_) * dim_, 0.0);
      moment_.assign(static_cast<std::size_t>(dim_), 0.0);
    }
  }

  void add(int arm, const std::optional<Covariate>& z, double response) {
    switch (shape_) {
      case Shape::kBinary:
        ++trials_[arm];
        successes_[arm] += response;
        return;
      case Shape::kInteraction: {
        const double zv = std::get<double>(*z);
        ++rows_[arm];
        sum_z_[arm] += zv;
        sum_zz_[arm] += zv * zv;
        sum_y_[arm] += response;
        sum_zy_[arm] += zv * response;
        return;
      }
      case Shape::kCommonSlope: {
        const double zv = std::get<double>(*z);
        std::vector<double> x(static_cast<std::size_t>(dim_), 0.0);
        x[arm == 0 ? 0 : 1] = 1.0;
        const std::vector<double> f = feature_(zv);
        for (std::size_t i = 0; i < f.size(); ++i) x[2 + i] = f[i];
        for (int r = 0; r < dim_; ++r) {
          moment_[static_cast<std::size_t>(r)] += x[static_cast<std::size_t>(r)] * response;
          for (int c = 0; c < dim_; ++c)
            normal_[static_cast<std::size_t>(r * dim_ + c)] +=
                x[static_cast<std::size_t>(r)] * x[static_cast<std::size_t>(c)];
        }
        ++joint_rows_;
        return;
      }
    }
  }

  bool ready() const {
    switch (shape_) {
      case Shape::kBinary:
        return trials_[0] > 0 && trials_[1] > 0;
      case Shape::kInteraction:
        return rows_[0] >= 2 && rows_[1] >= 2;
      case Shape::kCommonSlope:
        return joint_rows_ >= dim_;
    }
    return false;
  }

  std::vector<double> estimate() const {
    switch (shape_) {
      case Shape::kBinary: {
        const auto clip = [](double p) { return std::clamp(p, kBinaryClip, 1.0 - kBinaryClip); };
        return {clip(successes_[0] / static_cast<double>(trials_[0])),
                clip(successes_[1] / static_cast<double>(trials_[1]))};
      }
      case Shape::kInteraction: {
        std::vector<double> params(4, 0.0);
        for (int a = 0; a < 2; ++a) {
          const double n = static_cast<double>(rows_[a]);
          double det = n * sum_zz_[a] - sum_z_[a] * sum_z_[a];
          double nn = n, zz = sum_zz_[a];
          if (std::abs(det) < 1e-12 * std::max(1.0, n * std::max(1.0, sum_zz_[a]))) {
            nn += 1e-12;
            zz += 1e-12;
            det = nn * zz - sum_z_[a] * sum_z_[a];
            if (det == 0.0) throw NumericError("trial engine: singular per-arm design");
          }
          params[static_cast<std::size_t>(a)] = (sum_y_[a] * zz - sum_z_[a] * sum_zy_[a]) / det;
          params[static_cast<std::size_t>(2 + a)] = (nn * sum_zy_[a] - sum_z_[a] * sum_y_[a]) / det;
        }
        return params;
      }
      case Shape::kCommonSlope:
        return linalg::solve(normal_, moment_, dim_, 1e-12).x;
    }
    throw StateError("EstimateTracker: unhandled shape");
  }

 private:
  enum class Shape { kBinary, kInteraction, kCommonSlope };
  Shape shape_ = Shape::kBinary;
  long trials_[2] = {0, 0};
  double successes_[2] = {0.0, 0.0};
  long rows_[2] = {0, 0};
  double sum_z_[2] = {0, 0}, sum_zz_[2] = {0, 0}, sum_y_[2] = {0, 0}, sum_zy_[2] = {0, 0};
  int dim_ = 0;
  long joint_rows_ = 0;
  std::function<std::vector<double>(double)> feature_;
  std::vector<double> normal_;
  std::vector<double> moment_;
};

bool design_needs_estimates(const DesignRule& design) {
  return std::visit(
      [](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, RaRule>) {
          return true;
        } else if constexpr (std::is_same_v<T, CaraRule>) {
          return true;  // the estimate feeds the target even when it ignores it
        } else {
          return false;
        }
      },
      design);
}

// First assignment of a two-arm AA rule with no initial stage. Rules defined
// on the integer imbalance have D_0 = 0; rules defined on the proportion get
// the pi_0 = 0 convention of the convergence analysis.
double aa_first_step_probability(const AaRule& rule) {
  switch (rule.kind()) {
    case AaKind::kCompleteRandomization:
    case AaKind::kEfron:
    case AaKind::kAdjustableBcd:
      return 0.5;
    default:
      return rule.allocation_map(1).eval(0.0);
  }
}

int draw_assignment(Rng& rng, const std::vector<double>& probs, double fault) {
  if (fault == 0.0) return rng.weighted_index(probs);
  std::vector<double> adjusted(probs);
  adjusted[0] = std::clamp(probs[0] + fault, 0.0, 1.0);
  const double rest = 1.0 - adjusted[0];
  const double original_rest = 1.0 - probs[0];
  for (std::size_t k = 1; k < adjusted.size(); ++k)
    adjusted[k] = original_rest > 0.0 ? probs[k] * rest / original_rest
                                      : rest / static_cast<double>(adjusted.size() - 1);
  return rng.weighted_index(adjusted);
}

}  // namespace

void validate(const TrialConfig& config) {
  if (config.arms < 2) throw ConfigError("TrialConfig: need at least two arms");
  if (config.horizon < 1) throw ConfigError("TrialConfig: horizon must be positive");
  if (config.record_stride < 1) throw ConfigError("TrialConfig: record_stride must be >= 1");
  if (config.initial_per_arm < 0) throw ConfigError("TrialConfig: negative initial stage");
  if (config.horizon <= static_cast<long>(config.arms) * config.initial_per_arm)
    throw ConfigError("TrialConfig: horizon must exceed arms * initial_per_arm");
  if (!(config.draw_fault >= -1.0 && config.draw_fault <= 1.0))
    throw ConfigError("TrialConfig: draw_fault outside [-1,1]");
  if (config.response) validate_model(*config.response);
  if (config.covariates) validate_model(*config.covariates);

  const bool linear_response =
      config.response && !std::holds_alternative<BinaryModel>(*config.response);
  if (linear_response &&
      (!config.covariates || !std::holds_alternative<NormalCovariateModel>(*config.covariates)))
    throw ConfigError("TrialConfig: linear response models need a continuous covariate model "
                      "([covariates] section)");

  std::visit(
      [&](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, AaRule>) {
          if (config.arms != rule.arm_count())
            throw ConfigError("TrialConfig: design arity does not match the arms setting");
          if (config.arms > 2 && config.response)
            throw ConfigError("TrialConfig: response models are two-arm; drop the [model] "
                              "section for multi-arm designs");
        } else if constexpr (std::is_same_v<T, RaRule>) {
          if (config.arms != 2) throw ConfigError("TrialConfig: response-adaptive rules are two-arm");
          if (!config.response)
            throw ConfigError("TrialConfig: response-adaptive design needs a [model] section");
          if (!std::holds_alternative<BinaryModel>(*config.response))
            throw ConfigError("TrialConfig: response-adaptive estimation here is binary; use a "
                              "binary [model] section");
          if (config.initial_per_arm < 1)
            throw ConfigError("TrialConfig: response-adaptive design needs an initial stage "
                              "(m >= 1)");
        } else if constexpr (std::is_same_v<T, CaraRule>) {
          if (config.arms != 2) throw ConfigError("TrialConfig: CARA rules here are two-arm");
          if (!config.covariates ||
              !std::holds_alternative<NormalCovariateModel>(*config.covariates))
            throw ConfigError("TrialConfig: this CARA design needs a continuous [covariates] "
                              "section");
          if (!config.response)
            throw ConfigError("TrialConfig: CARA design needs a [model] section");
          if (config.initial_per_arm < 1)
            throw ConfigError("TrialConfig: CARA design needs an initial stage (m >= 1)");
          if (rule.kind() == CaraKind::kEth &&
              !std::holds_alternative<LinearInteractionModel>(*config.response))
            throw ConfigError("TrialConfig: the ETH rule estimates a linear interaction model");
          if (linear_response && config.initial_per_arm < 2)
            throw ConfigError("TrialConfig: linear estimation needs m >= 2 per arm");
        } else {
          if (config.arms != 2) throw ConfigError("TrialConfig: stratified rules are two-arm");
          if (!config.covariates ||
              !std::holds_alternative<CategoricalCovariateModel>(*config.covariates))
            throw ConfigError("TrialConfig: stratified design needs a categorical [covariates] "
                              "section");
          const auto& cov = std::get<CategoricalCovariateModel>(*config.covariates);
          if (rule.kind() == StrataKind::kRdbcd &&
              (rule.target_levels_t() != cov.levels_t || rule.target_levels_w() != cov.levels_w))
            throw ConfigError("TrialConfig: target table dimensions do not match the "
                              "[covariates] levels");
          if (config.response && !std::holds_alternative<BinaryModel>(*config.response))
            throw ConfigError("TrialConfig: stratified designs accept only binary response "
                              "models");
        }
      },
      config.design);
}

Trajectory run_trial(const TrialConfig& config) {
  validate(config);
  Rng rng(config.seed, config.stream);
  const int arms = config.arms;
  const long horizon = config.horizon;
  const long initial_len = static_cast<long>(config.initial_per_arm) * arms;

  const auto* aa = std::get_if<AaRule>(&config.design);
  const auto* ra = std::get_if<RaRule>(&config.design);
  const auto* cara = std::get_if<CaraRule>(&config.design);
  const auto* strata = std::get_if<StrataRule>(&config.design);

  AllocationState state(arms);
  std::optional<StratumTable> table;
  std::optional<AtkinsonAccumulator> accumulator;
  if (strata) {
    const auto& cov = std::get<CategoricalCovariateModel>(*config.covariates);
    table.emplace(cov.levels_t, cov.levels_w);
    if (strata->uses_accumulator())
      accumulator.emplace(cov.levels_t, cov.levels_w, strata->accumulator_interactions());
  }

  std::optional<EstimateTracker> tracker;
  if (config.response && design_needs_estimates(config.design))
    tracker.emplace(*config.response);
  std::optional<RhoTracker> rho_tracker;
  if (cara && cara->kind() == CaraKind::kZhangHu) rho_tracker.emplace(cara->target());

  // Forced stage: m permuted blocks, plus one round-robin block for K-arm
  // rules whose proportions must be interior before the rule runs.
  const bool multi_arm_aa = aa && aa->arm_count() > 2;
  const long forced_len = std::max(initial_len, multi_arm_aa ? static_cast<long>(arms) : 0L);
  PermutedBlockDealer dealer(arms);

  std::vector<double> martingale(static_cast<std::size_t>(arms), 0.0);
  std::vector<double> current_estimate;

  Trajectory traj;
  traj.horizon = horizon;
  traj.arms = arms;
  if (table) {
    for (int j = 0; j < table->levels_t(); ++j)
      for (int l = 0; l < table->levels_w(); ++l)
        traj.stratum_labels.push_back(std::to_string(j) + ":" + std::to_string(l));
  }

  const auto record = [&](long n) {
    traj.steps.push_back(n);
    traj.pi_path.push_back(state.proportions());
    if (table) {
      std::vector<double> row;
      row.reserve(static_cast<std::size_t>(table->cells()));
      for (int j = 0; j < table->levels_t(); ++j)
        for (int l = 0; l < table->levels_w(); ++l)
          row.push_back(table->empty({j, l}) ? std::numeric_limits<double>::quiet_NaN()
                                             : table->proportion({j, l}));
      traj.stratum_pi_path.push_back(std::move(row));
    }
    if (tracker) traj.estimate_path.push_back(current_estimate);
    traj.martingale_path.push_back(martingale[0]);
  };

  for (long n = 0; n < horizon; ++n) {
    std::optional<Covariate> z;
    if (config.covariates) z = sample_covariate(*config.covariates, rng);

    // Estimate from the first n observations, before this subject's response.
    if (tracker && n >= initial_len && tracker->ready()) current_estimate = tracker->estimate();

    std::vector<double> probs;
    int arm;
    if (n < forced_len) {
      probs = dealer.probabilities();
      arm = dealer.deal(rng);
    } else {
      if (aa) {
        probs = state.step_count() == 0
                    ? std::vector<double>{aa_first_step_probability(*aa),
                                          1.0 - aa_first_step_probability(*aa)}
                    : aa->probabilities(state);
      } else if (ra) {
        const double phi = ra->probability(state.proportion(0), current_estimate);
        probs = {phi, 1.0 - phi};
      } else if (cara) {
        const double zv = std::get<double>(*z);
        const double rho = rho_tracker ? rho_tracker->rho(current_estimate) : 0.5;
        const double phi = cara->probability(state.proportion(0), current_estimate, zv, rho);
        probs = {phi, 1.0 - phi};
      } else {
        const Stratum s = std::get<Stratum>(*z);
        const double phi = strata->uses_accumulator() ? strata->probability(*accumulator, s)
                                                      : strata->probability(*table, s);
        probs = {phi, 1.0 - phi};
      }
      arm = draw_assignment(rng, probs, config.draw_fault);
    }

    std::optional<double> response;
    if (config.response) response = sample_response(*config.response, arm, z, rng);

    for (int k = 0; k < arms; ++k)
      martingale[static_cast<std::size_t>(k)] += (arm == k ? 1.0 : 0.0) - probs[static_cast<std::size_t>(k)];

    state = state.updated(arm);
    if (table) {
      const Stratum s = std::get<Stratum>(*z);
      table = table->updated(s, arm);
      if (accumulator) accumulator->add(s, arm);
    }
    if (rho_tracker) rho_tracker->observe(std::get<double>(*z), {});
    if (tracker && response) tracker->add(arm, z, *response);

    const long done = n + 1;
    if (done % config.record_stride == 0 || done == horizon) record(done);
  }

  traj.final_state = state;
  traj.final_table = table;
  traj.final_estimate = current_estimate;
  traj.final_martingale = martingale;
  return traj;
}

double martingale_residual(const Trajectory& trajectory) {
  if (trajectory.horizon < 1 || trajectory.final_martingale.empty())
    throw StateError("martingale_residual: trajectory carries no martingale path");
  double sup = 0.0;
  for (double m : trajectory.final_martingale) sup = std::max(sup, std::abs(m));
  return sup / static_cast<double>(trajectory.horizon);
}

ReplicationSummary run_replications(const TrialConfig& config, int replications,
                                    std::uint64_t base_seed, int threads) {
  if (replications < 1) throw DomainError("run_replications: need at least one replication");
  validate(config);

  ReplicationSummary summary;
  summary.replications = replications;
  summary.arms = config.arms;
  summary.horizon = config.horizon;
  summary.base_seed = base_seed;
  summary.final_pi.resize(static_cast<std::size_t>(replications));
  summary.martingale_residuals.resize(static_cast<std::size_t>(replications));
  const bool stratified = std::holds_alternative<StrataRule>(config.design);
  if (stratified) {
    summary.final_stratum_pi.resize(static_cast<std::size_t>(replications));
    summary.final_margin_t.resize(static_cast<std::size_t>(replications));
    summary.final_margin_w.resize(static_cast<std::size_t>(replications));
  }

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::string> errors(static_cast<std::size_t>(replications));

  const auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= replications) return;
      if (failed.load(std::memory_order_relaxed)) return;
      try {
        TrialConfig cfg = config;
        cfg.seed = base_seed;
        cfg.stream = static_cast<std::uint64_t>(r);
        Trajectory traj = run_trial(cfg);
        const auto i = static_cast<std::size_t>(r);
        summary.final_pi[i] = traj.final_state.proportions();
        summary.martingale_residuals[i] = martingale_residual(traj);
        if (traj.final_table) {
          const StratumTable& table = *traj.final_table;
          std::vector<double> cells;
          for (int j = 0; j < table.levels_t(); ++j)
            for (int l = 0; l < table.levels_w(); ++l)
              cells.push_back(table.empty({j, l}) ? std::numeric_limits<double>::quiet_NaN()
                                                  : table.proportion({j, l}));
          summary.final_stratum_pi[i] = std::move(cells);
          std::vector<double> mt, mw;
          for (int j = 0; j < table.levels_t(); ++j)
            mt.push_back(marginal_imbalance(table, MarginAxis::kT, j));
          for (int l = 0; l < table.levels_w(); ++l)
            mw.push_back(marginal_imbalance(table, MarginAxis::kW, l));
          summary.final_margin_t[i] = std::move(mt);
          summary.final_margin_w[i] = std::move(mw);
        }
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(r)] = e.what();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  int worker_count = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  worker_count = std::clamp(worker_count, 1, replications);
  if (worker_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(worker_count - 1));
    for (int t = 0; t + 1 < worker_count; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
  }

  for (std::size_t r = 0; r < errors.size(); ++r)
    if (!errors[r].empty())
      throw Error("replication " + std::to_string(r) + " failed: " + errors[r]);

  if (stratified) {
    const auto& cov = std::get<CategoricalCovariateModel>(*config.covariates);
    for (int j = 0; j < cov.levels_t; ++j)
      for (int l = 0; l < cov.levels_w; ++l)
        summary.stratum_labels.push_back(std::to_string(j) + ":" + std::to_string(l));
  }
  return summary;
}

ConvergenceReport convergence_report(const ReplicationSummary& summary,
                                     std::span<const double> limit, double epsilon,
                                     std::span<const double> stratum_limit) {
  if (static_cast<int>(limit.size()) != summary.arms)
    throw DomainError("convergence_report: limit dimension does not match the arm count");
  if (!(epsilon > 0.0)) throw DomainError("convergence_report: epsilon must be positive");
  if (!stratum_limit.empty() &&
      (summary.final_stratum_pi.empty() ||
       stratum_limit.size() != summary.final_stratum_pi.front().size()))
    throw DomainError("convergence_report: stratum limit dimension does not match the table");

  ConvergenceReport report;
  report.epsilon = epsilon;
  report.limit.assign(limit.begin(), limit.end());
  report.per_arm_mean_error.assign(limit.size(), 0.0);

  const double reps = static_cast<double>(summary.replications);
  long within = 0;
  for (const std::vector<double>& pi : summary.final_pi) {
    double sup = 0.0;
    for (std::size_t a = 0; a < limit.size(); ++a) {
      const double err = std::abs(pi[a] - limit[a]);
      report.per_arm_mean_error[a] += err / reps;
      sup = std::max(sup, err);
    }
    report.mean_abs_error += sup / reps;
    report.max_abs_error = std::max(report.max_abs_error, sup);
    if (sup <= epsilon) ++within;
  }
  report.fraction_within = static_cast<double>(within) / reps;

  if (!stratum_limit.empty()) {
    report.stratum_limit.assign(stratum_limit.begin(), stratum_limit.end());
    report.stratum_mean_abs_error.assign(stratum_limit.size(), 0.0);
    report.stratum_fraction_within.assign(stratum_limit.size(), 0.0);
    std::vector<long> counted(stratum_limit.size(), 0);
    for (const std::vector<double>& cells : summary.final_stratum_pi) {
      for (std::size_t c = 0; c < stratum_limit.size(); ++c) {
        if (std::isnan(cells[c])) continue;  // stratum never filled in this replication
        const double err = std::abs(cells[c] - stratum_limit[c]);
        report.stratum_mean_abs_error[c] += err;
        if (err <= epsilon) report.stratum_fraction_within[c] += 1.0;
        ++counted[c];
      }
    }
    for (std::size_t c = 0; c < stratum_limit.size(); ++c) {
      if (counted[c] == 0) continue;
      report.stratum_mean_abs_error[c] /= static_cast<double>(counted[c]);
      report.stratum_fraction_within[c] /= static_cast<double>(counted[c]);
    }
  }

  for (double r : summary.martingale_residuals)
    report.mean_abs_martingale_residual += std::abs(r) / reps;
  return report;
}

}  // namespace allocsim
