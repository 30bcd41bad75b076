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
#include <span>

namespace allocsim {

/// Counter-based 64-bit generator (splitmix64 output function over an
/// additive counter). A (seed, stream) pair selects an independent stream, so
/// replication r can run on stream r of the same base seed with no overlap
/// bookkeeping. Deterministic across platforms; all distributions below are
/// implemented in-library rather than via <random> for that reason.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double next_double();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n);

  /// Standard normal via the polar method (one spare cached).
  double next_gaussian();

  bool bernoulli(double p);

  /// Index drawn from an unnormalized nonnegative weight vector.
  int weighted_index(std::span<const double> weights);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace allocsim
