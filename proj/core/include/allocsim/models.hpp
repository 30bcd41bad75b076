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

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "allocsim/rng.hpp"
#include "allocsim/state.hpp"

namespace allocsim {

// ---------------------------------------------------------------------------
// Response models
// ---------------------------------------------------------------------------

/// Bernoulli outcomes per arm. Success probabilities must be strictly
/// interior when the model feeds estimation (enforced at configuration time);
/// the sampler itself tolerates the degenerate endpoints.
struct BinaryModel {
  double success_a = 0.5;
  double success_b = 0.5;
};

/// Gaussian outcome with per-arm baseline and per-arm slope on a scalar
/// covariate: mean = mu_arm + z * beta_arm.
struct LinearInteractionModel {
  double mu_a = 0.0;
  double mu_b = 0.0;
  double beta_a = 0.0;
  double beta_b = 0.0;  // beta_a != beta_b
  double noise_sd = 1.0;
};

/// Gaussian outcome with per-arm baseline and a common slope vector on a
/// known feature map of the covariate: mean = mu_arm + feature(z) . beta.
struct LinearCommonSlopeModel {
  double mu_a = 0.0;
  double mu_b = 0.0;
  std::vector<double> beta;
  std::function<std::vector<double>(double)> feature_map;  // defaults to {z}
  double noise_sd = 1.0;
};

using ResponseModel = std::variant<BinaryModel, LinearInteractionModel, LinearCommonSlopeModel>;

/// Throws DomainError on invalid parameters (used at configuration time).
void validate_model(const ResponseModel& model);

/// Draws one outcome. Linear models require a scalar covariate.
double sample_response(const ResponseModel& model, int arm, const std::optional<Covariate>& z,
                       Rng& rng);

// ---------------------------------------------------------------------------
// Covariate models
// ---------------------------------------------------------------------------

struct NormalCovariateModel {
  double mean = 0.0;
  double sd = 1.0;
};

struct CategoricalCovariateModel {
  int levels_t = 2;
  int levels_w = 2;
  std::vector<double> joint;  // row-major levels_t x levels_w, all > 0, sums to 1
};

using CovariateModel = std::variant<NormalCovariateModel, CategoricalCovariateModel>;

void validate_model(const CovariateModel& model);
Covariate sample_covariate(const CovariateModel& model, Rng& rng);

// ---------------------------------------------------------------------------
// Running covariate summary (first/second moments or stratum frequencies)
// ---------------------------------------------------------------------------

class CovariateSummary {
 public:
  static CovariateSummary continuous();
  static CovariateSummary categorical(int levels_t, int levels_w);

  long size() const noexcept { return n_; }
  CovariateSummary updated(const Covariate& z) const;

  double mean() const;
  double second_moment() const;
  std::vector<double> stratum_freqs() const;  // empty summary -> error
  bool is_categorical() const noexcept { return levels_t_ > 0; }

 private:
  CovariateSummary() = default;
  long n_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  int levels_t_ = 0;
  int levels_w_ = 0;
  std::vector<long> stratum_counts_;
};

inline CovariateSummary update_summary(const CovariateSummary& summary, const Covariate& z) {
  return summary.updated(z);
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// Empirical per-arm success frequencies, clipped into
/// [kBinaryClip, 1 - kBinaryClip] so that continuous target functions stay
/// well defined when an arm has all failures early. The clip vanishes
/// asymptotically for interior true probabilities.
inline constexpr double kBinaryClip = 0.01;

struct BinaryEstimate {
  double success_a = 0.0;
  double success_b = 0.0;
  bool clipped = false;

  std::vector<double> params() const { return {success_a, success_b}; }
};

BinaryEstimate estimate_binary(const TrialHistory& history);

enum class LinearShape { kInteraction, kCommonSlope };

struct LeastSquaresEstimate {
  std::vector<double> params;  // (muA, muB, betaA, betaB) or (muA, muB, beta...)
  bool used_ridge = false;
};

/// Ordinary least squares on the recorded (arm, covariate, response) rows.
/// Structural rank deficiency (fewer rows than parameters) raises
/// NumericError; a numerically singular solve with enough rows falls back to
/// a 1e-12 ridge and is flagged.
LeastSquaresEstimate estimate_least_squares(const TrialHistory& history, LinearShape shape,
                                            int feature_dim = 1);

// ---------------------------------------------------------------------------
// Target allocations
// ---------------------------------------------------------------------------

/// A desired limiting allocation to arm A as a function of a parameter
/// estimate and (optionally) a covariate value. Output must be strictly
/// inside (0,1). Continuity in the parameters is a declared claim of the
/// caller; it is what the convergence theory needs and cannot be checked on a
/// black box.
class TargetFunction {
 public:
  TargetFunction() = default;  // unusable until assigned; operator() throws

  static TargetFunction constant(double value);
  /// sqrt(pA) / (sqrt(pA) + sqrt(pB)) of a binary estimate (pA, pB).
  static TargetFunction neyman();
  static TargetFunction custom(std::function<double(std::span<const double>, double)> eval,
                               bool depends_on_params, bool depends_on_covariate);

  double operator()(std::span<const double> params, double z = 0.0) const;
  bool depends_on_params() const noexcept { return depends_on_params_; }
  bool depends_on_covariate() const noexcept { return depends_on_covariate_; }

 private:
  std::function<double(std::span<const double>, double)> eval_;
  bool depends_on_params_ = false;
  bool depends_on_covariate_ = false;
};

/// Standard normal CDF, absolute error <= 1e-12 (asserted against frozen
/// high-precision reference values in the test suite).
double normal_cdf(double x);

// ---------------------------------------------------------------------------
// Initial stage
// ---------------------------------------------------------------------------

/// Deals one permuted block of the K arms at a time: each block assigns every
/// arm exactly once, in uniformly random order. probabilities() exposes the
/// exact conditional law of the next deal so martingale bookkeeping stays
/// correct through forced stages.
class PermutedBlockDealer {
 public:
  explicit PermutedBlockDealer(int arm_count);
  std::vector<double> probabilities() const;
  int deal(Rng& rng);

 private:
  std::vector<int> remaining_;
  int left_ = 0;
};

/// m permuted blocks of size K: a history of length m*K with exactly m
/// assignments per arm, covariates/responses drawn from the given models.
TrialHistory initial_stage(int per_arm, int arm_count,
                           const std::optional<ResponseModel>& response,
                           const std::optional<CovariateModel>& covariate, Rng& rng);

}  // namespace allocsim
