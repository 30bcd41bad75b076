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

#include "allocsim/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "allocsim/errors.hpp"
#include "allocsim/linalg.hpp"

namespace allocsim {

namespace {

double require_scalar_covariate(const std::optional<Covariate>& z, const char* what) {
  if (!z || !std::holds_alternative<double>(*z))
    throw DomainError(std::string(what) + ": scalar covariate required");
  return std::get<double>(*z);
}

std::vector<double> feature_or_identity(const LinearCommonSlopeModel& model, double z) {
  if (model.feature_map) return model.feature_map(z);
  return {z};
}

}  // namespace

void validate_model(const ResponseModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BinaryModel>) {
          if (!(m.success_a > 0.0 && m.success_a < 1.0 && m.success_b > 0.0 && m.success_b < 1.0))
            throw DomainError("BinaryModel: success probabilities must be strictly inside (0,1)");
        } else if constexpr (std::is_same_v<T, LinearInteractionModel>) {
          if (m.beta_a == m.beta_b)
            throw DomainError("LinearInteractionModel: beta_a must differ from beta_b");
          if (!(m.noise_sd >= 0.0)) throw DomainError("LinearInteractionModel: negative noise_sd");
        } else {
          if (m.beta.empty()) throw DomainError("LinearCommonSlopeModel: empty slope vector");
          if (!(m.noise_sd >= 0.0)) throw DomainError("LinearCommonSlopeModel: negative noise_sd");
        }
      },
      model);
}

double sample_response(const ResponseModel& model, int arm, const std::optional<Covariate>& z,
                       Rng& rng) {
  if (arm != 0 && arm != 1) throw DomainError("sample_response: two-arm response models");
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BinaryModel>) {
          const double p = arm == 0 ? m.success_a : m.success_b;
          if (!(p >= 0.0 && p <= 1.0)) throw DomainError("BinaryModel: probability outside [0,1]");
          return rng.bernoulli(p) ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, LinearInteractionModel>) {
          const double zv = require_scalar_covariate(z, "LinearInteractionModel");
          const double mean =
              (arm == 0) ? m.mu_a + zv * m.beta_a : m.mu_b + zv * m.beta_b;
          return mean + m.noise_sd * rng.next_gaussian();
        } else {
          const double zv = require_scalar_covariate(z, "LinearCommonSlopeModel");
          const std::vector<double> f = feature_or_identity(m, zv);
          if (f.size() != m.beta.size())
            throw DomainError("LinearCommonSlopeModel: feature/beta dimension mismatch");
          double mean = arm == 0 ? m.mu_a : m.mu_b;
          for (std::size_t i = 0; i < f.size(); ++i) mean += f[i] * m.beta[i];
          return mean + m.noise_sd * rng.next_gaussian();
        }
      },
      model);
}

void validate_model(const CovariateModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NormalCovariateModel>) {
          if (!(m.sd > 0.0)) throw DomainError("NormalCovariateModel: sd must be positive");
        } else {
          if (m.levels_t < 1 || m.levels_w < 1)
            throw DomainError("CategoricalCovariateModel: need at least one level per covariate");
          if (m.joint.size() != static_cast<std::size_t>(m.levels_t) * m.levels_w)
            throw DomainError("CategoricalCovariateModel: joint table size mismatch");
          double total = 0.0;
          for (double p : m.joint) {
            if (!(p > 0.0))
              throw DomainError("CategoricalCovariateModel: every stratum needs probability > 0");
            total += p;
          }
          if (std::abs(total - 1.0) > 1e-9)
            throw DomainError("CategoricalCovariateModel: joint probabilities must sum to 1");
        }
      },
      model);
}

Covariate sample_covariate(const CovariateModel& model, Rng& rng) {
  return std::visit(
      [&](const auto& m) -> Covariate {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NormalCovariateModel>) {
          return m.mean + m.sd * rng.next_gaussian();
        } else {
          const int flat = rng.weighted_index(m.joint);
          return Stratum{flat / m.levels_w, flat % m.levels_w};
        }
      },
      model);
}

CovariateSummary CovariateSummary::continuous() { return CovariateSummary(); }

CovariateSummary CovariateSummary::categorical(int levels_t, int levels_w) {
  if (levels_t < 1 || levels_w < 1)
    throw DomainError("CovariateSummary::categorical: invalid level counts");
  CovariateSummary s;
  s.levels_t_ = levels_t;
  s.levels_w_ = levels_w;
  s.stratum_counts_.assign(static_cast<std::size_t>(levels_t) * levels_w, 0);
  return s;
}

CovariateSummary CovariateSummary::updated(const Covariate& z) const {
  CovariateSummary next(*this);
  if (std::holds_alternative<double>(z)) {
    if (is_categorical())
      throw DomainError("CovariateSummary: scalar observation in a categorical summary");
    const double v = std::get<double>(z);
    next.sum_ += v;
    next.sum_sq_ += v * v;
  } else {
    if (!is_categorical())
      throw DomainError("CovariateSummary: stratum observation in a continuous summary");
    const Stratum s = std::get<Stratum>(z);
    if (s.j < 0 || s.j >= levels_t_ || s.l < 0 || s.l >= levels_w_)
      throw DomainError("CovariateSummary: stratum (" + std::to_string(s.j) + "," +
                        std::to_string(s.l) + ") out of range");
    ++next.stratum_counts_[static_cast<std::size_t>(s.j * levels_w_ + s.l)];
  }
  ++next.n_;
  return next;
}

double CovariateSummary::mean() const {
  if (n_ == 0) throw StateError("CovariateSummary::mean: empty summary");
  return sum_ / static_cast<double>(n_);
}

double CovariateSummary::second_moment() const {
  if (n_ == 0) throw StateError("CovariateSummary::second_moment: empty summary");
  return sum_sq_ / static_cast<double>(n_);
}

std::vector<double> CovariateSummary::stratum_freqs() const {
  if (!is_categorical()) throw StateError("CovariateSummary::stratum_freqs: continuous summary");
  if (n_ == 0) throw StateError("CovariateSummary::stratum_freqs: empty summary");
  std::vector<double> out(stratum_counts_.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(stratum_counts_[i]) / static_cast<double>(n_);
  return out;
}

BinaryEstimate estimate_binary(const TrialHistory& history) {
  if (history.state().arm_count() != 2)
    throw DomainError("estimate_binary: two-arm histories only");
  long trials[2] = {0, 0};
  double successes[2] = {0.0, 0.0};
  for (const AssignmentRecord& r : history.records()) {
    if (!r.response) continue;
    ++trials[r.arm];
    successes[r.arm] += *r.response;
  }
  if (trials[0] == 0 || trials[1] == 0)
    throw StateError("estimate_binary: need at least one observed response per arm");

  BinaryEstimate est;
  const auto clip = [&est](double p) {
    const double clipped = std::clamp(p, kBinaryClip, 1.0 - kBinaryClip);
    if (clipped != p) est.clipped = true;
    return clipped;
  };
  est.success_a = clip(successes[0] / static_cast<double>(trials[0]));
  est.success_b = clip(successes[1] / static_cast<double>(trials[1]));
  return est;
}

LeastSquaresEstimate estimate_least_squares(const TrialHistory& history, LinearShape shape,
                                            int feature_dim) {
  if (history.state().arm_count() != 2)
    throw DomainError("estimate_least_squares: two-arm histories only");

  if (shape == LinearShape::kInteraction) {
    // Per-arm 2x2 normal equations for (mu, beta).
    double sz[2] = {0, 0}, szz[2] = {0, 0}, sy[2] = {0, 0}, szy[2] = {0, 0};
    long rows[2] = {0, 0};
    for (const AssignmentRecord& r : history.records()) {
      if (!r.response || !r.covariate || !std::holds_alternative<double>(*r.covariate)) continue;
      const double z = std::get<double>(*r.covariate);
      const double y = *r.response;
      const int a = r.arm;
      ++rows[a];
      sz[a] += z;
      szz[a] += z * z;
      sy[a] += y;
      szy[a] += z * y;
    }
    if (rows[0] < 2 || rows[1] < 2)
      throw NumericError("estimate_least_squares: fewer rows than parameters per arm");
    LeastSquaresEstimate est;
    est.params.resize(4);
    for (int a = 0; a < 2; ++a) {
      auto solved = linalg::solve({static_cast<double>(rows[a]), sz[a], sz[a], szz[a]},
                                  {sy[a], szy[a]}, 2, 1e-12);
      est.params[static_cast<std::size_t>(a)] = solved.x[0];       // mu
      est.params[static_cast<std::size_t>(2 + a)] = solved.x[1];   // beta
      est.used_ridge = est.used_ridge || solved.used_ridge;
    }
    return est;
  }

  // Common slope: joint normal equations in (muA, muB, beta...), with
  // monomial features z, z^2, ..., z^feature_dim.
  if (feature_dim < 1) throw DomainError("estimate_least_squares: feature_dim must be >= 1");
  const int d = 2 + feature_dim;
  std::vector<double> m(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<double> v(static_cast<std::size_t>(d), 0.0);
  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  long rows = 0;
  for (const AssignmentRecord& r : history.records()) {
    if (!r.response || !r.covariate || !std::holds_alternative<double>(*r.covariate)) continue;
    const double z = std::get<double>(*r.covariate);
    ++rows;
    x.assign(static_cast<std::size_t>(d), 0.0);
    x[r.arm == 0 ? 0 : 1] = 1.0;
    double power = 1.0;
    for (int f = 0; f < feature_dim; ++f) {
      power *= z;
      x[static_cast<std::size_t>(2 + f)] = power;
    }
    for (int i = 0; i < d; ++i) {
      v[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)] * *r.response;
      for (int jj = 0; jj < d; ++jj)
        m[static_cast<std::size_t>(i * d + jj)] +=
            x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(jj)];
    }
  }
  if (rows < d) throw NumericError("estimate_least_squares: fewer rows than parameters");
  auto solved = linalg::solve(std::move(m), std::move(v), d, 1e-12);
  return {std::move(solved.x), solved.used_ridge};
}

TargetFunction TargetFunction::constant(double value) {
  if (!(value > 0.0 && value < 1.0))
    throw DomainError("TargetFunction::constant: value must be strictly inside (0,1)");
  TargetFunction t;
  t.eval_ = [value](std::span<const double>, double) { return value; };
  return t;
}

TargetFunction TargetFunction::neyman() {
  TargetFunction t;
  t.eval_ = [](std::span<const double> params, double) {
    if (params.size() < 2) throw DomainError("neyman target: needs a (pA, pB) estimate");
    const double ra = std::sqrt(params[0]);
    const double rb = std::sqrt(params[1]);
    if (!(ra > 0.0 && rb > 0.0)) throw DomainError("neyman target: probabilities must be positive");
    return ra / (ra + rb);
  };
  t.depends_on_params_ = true;
  return t;
}

TargetFunction TargetFunction::custom(std::function<double(std::span<const double>, double)> eval,
                                      bool depends_on_params, bool depends_on_covariate) {
  if (!eval) throw DomainError("TargetFunction::custom: empty evaluator");
  TargetFunction t;
  t.eval_ = std::move(eval);
  t.depends_on_params_ = depends_on_params;
  t.depends_on_covariate_ = depends_on_covariate;
  return t;
}

double TargetFunction::operator()(std::span<const double> params, double z) const {
  if (!eval_) throw StateError("TargetFunction: default-constructed");
  const double v = eval_(params, z);
  if (!(v > 0.0 && v < 1.0))
    throw DomainError("TargetFunction: value " + std::to_string(v) +
                      " outside the open interval (0,1)");
  return v;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

PermutedBlockDealer::PermutedBlockDealer(int arm_count) {
  if (arm_count < 2) throw DomainError("PermutedBlockDealer: need at least two arms");
  remaining_.assign(static_cast<std::size_t>(arm_count), 0);
}

std::vector<double> PermutedBlockDealer::probabilities() const {
  std::vector<double> p(remaining_.size());
  if (left_ == 0) {
    // fresh block: one slot per arm
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return p;
  }
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = static_cast<double>(remaining_[i]) / static_cast<double>(left_);
  return p;
}

int PermutedBlockDealer::deal(Rng& rng) {
  if (left_ == 0) {
    std::fill(remaining_.begin(), remaining_.end(), 1);
    left_ = static_cast<int>(remaining_.size());
  }
  std::uint64_t pick = rng.next_below(static_cast<std::uint64_t>(left_));
  for (std::size_t i = 0; i < remaining_.size(); ++i) {
    if (remaining_[i] == 0) continue;
    if (pick == 0) {
      --remaining_[i];
      --left_;
      return static_cast<int>(i);
    }
    --pick;
  }
  throw StateError("PermutedBlockDealer: internal inconsistency");
}

TrialHistory initial_stage(int per_arm, int arm_count,
                           const std::optional<ResponseModel>& response,
                           const std::optional<CovariateModel>& covariate, Rng& rng) {
  if (per_arm < 1) throw DomainError("initial_stage: per_arm must be >= 1");
  TrialHistory history(arm_count);
  PermutedBlockDealer dealer(arm_count);
  for (long step = 1; step <= static_cast<long>(per_arm) * arm_count; ++step) {
    AssignmentRecord record;
    record.step = step;
    if (covariate) record.covariate = sample_covariate(*covariate, rng);
    record.arm = dealer.deal(rng);
    if (response) record.response = sample_response(*response, record.arm, record.covariate, rng);
    history.append(std::move(record));
  }
  return history;
}

}  // namespace allocsim
