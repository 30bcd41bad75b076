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

#include "allocsim/verify.hpp"

#include <cmath>
#include <sstream>

#include "allocsim/rng.hpp"

namespace allocsim {

namespace {

std::string point(double x, double v) {
  std::ostringstream os;
  os << "x=" << x << " -> " << v;
  return os.str();
}

PropertyCheck pass(std::string name) { return {std::move(name), true, ""}; }

PropertyCheck fail(std::string name, std::string detail) {
  return {std::move(name), false, std::move(detail)};
}

AllocationState random_state(Rng& rng, int arms, long max_n) {
  AllocationState state(arms);
  const long n = 1 + static_cast<long>(rng.next_below(static_cast<std::uint64_t>(max_n)));
  for (long i = 0; i < n; ++i)
    state = state.updated(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(arms))));
  return state;
}

PropertyCheck check_probability_vectors(const char* name,
                                        const std::function<std::vector<double>(Rng&)>& draw,
                                        int cases, Rng& rng) {
  for (int i = 0; i < cases; ++i) {
    const std::vector<double> probs = draw(rng);
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0 && p <= 1.0))
        return fail(name, "component " + std::to_string(p) + " outside [0,1]");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      return fail(name, "components sum to " + std::to_string(total));
  }
  return pass(name);
}

StratumTable random_table(Rng& rng, int levels_t, int levels_w, long updates) {
  StratumTable table(levels_t, levels_w);
  for (long i = 0; i < updates; ++i) {
    const Stratum s{static_cast<int>(rng.next_below(static_cast<std::uint64_t>(levels_t))),
                    static_cast<int>(rng.next_below(static_cast<std::uint64_t>(levels_w)))};
    table = table.updated(s, rng.bernoulli(0.5) ? 0 : 1);
  }
  return table;
}

// Same stratum sizes, one B flipped to A in `cell`: isolates the rule's
// dependence on that cell's proportion.
bool build_flip_pair(Rng& rng, int levels_t, int levels_w, long updates, Stratum cell,
                     StratumTable& low, StratumTable& high) {
  std::vector<std::pair<Stratum, int>> sequence;
  int flip_index = -1;
  for (long i = 0; i < updates; ++i) {
    const Stratum s{static_cast<int>(rng.next_below(static_cast<std::uint64_t>(levels_t))),
                    static_cast<int>(rng.next_below(static_cast<std::uint64_t>(levels_w)))};
    const int arm = rng.bernoulli(0.5) ? 0 : 1;
    if (arm == 1 && s == cell) flip_index = static_cast<int>(sequence.size());
    sequence.emplace_back(s, arm);
  }
  if (flip_index < 0) return false;
  StratumTable a(levels_t, levels_w), b(levels_t, levels_w);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    a = a.updated(sequence[i].first, sequence[i].second);
    const int arm = static_cast<int>(i) == flip_index ? 0 : sequence[i].second;
    b = b.updated(sequence[i].first, arm);
  }
  low = a;
  high = b;
  return true;
}

std::vector<PropertyCheck> verify_aa(const AaRule& rule, Rng& rng) {
  std::vector<PropertyCheck> checks;
  const int arms = rule.arm_count();

  checks.push_back(check_probability_vectors(
      "probability vectors in range and sum to one",
      [&](Rng& r) {
        AllocationState s = random_state(r, arms, 400);
        if (rule.kind() == AaKind::kWeiMultiOdds) {
          // interior proportions required
          for (int a = 0; a < arms; ++a) s = s.updated(a);
        }
        return rule.probabilities(s);
      },
      500, rng));

  if (arms == 2) {
    const ScalarMap map = rule.allocation_map(3);
    checks.push_back(check_map_range(map));
    checks.push_back(check_map_monotone(map));

    if (rule.kind() == AaKind::kEfron || rule.kind() == AaKind::kWeiAdaptive ||
        rule.kind() == AaKind::kAdjustableBcd) {
      PropertyCheck symmetry = pass("phi(x) + phi(1-x) = 1 away from the tie point");
      for (int i = 0; i < 101; ++i) {
        const double x = i / 100.0;
        if (std::abs(x - 0.5) < 1e-12) continue;
        const double total = map.eval(x) + map.eval(1.0 - x);
        if (std::abs(total - 1.0) > 1e-9) {
          symmetry = fail(symmetry.name, point(x, total));
          break;
        }
      }
      checks.push_back(symmetry);
    }

    try {
      const std::vector<double> t = rule.limit();
      const DowncrossingCheck dc = verify_downcrossing(map, t[0], 1001, 1e-9);
      if (dc.ok) {
        checks.push_back(pass("limit verifies as a downcrossing on a 1001-point grid"));
      } else {
        checks.push_back(fail("limit verifies as a downcrossing on a 1001-point grid",
                              point(dc.violations.front().x, dc.violations.front().value)));
      }
    } catch (const SolverError& e) {
      checks.push_back(fail("limit solvable", e.what()));
    }
  } else {
    try {
      const DowncrossingResult t = find_vectorial_downcrossing(rule.allocation_map_multi());
      checks.push_back(pass("vectorial downcrossing located and verified componentwise"));
      double total = 0.0;
      for (double c : t.point) total += c;
      checks.push_back(std::abs(total - 1.0) <= 1e-6
                           ? pass("vectorial limit sums to one")
                           : fail("vectorial limit sums to one", std::to_string(total)));
    } catch (const SolverError& e) {
      checks.push_back(fail("vectorial downcrossing located and verified componentwise", e.what()));
    }
  }
  return checks;
}

std::vector<PropertyCheck> verify_ra(const RaRule& rule, Rng& rng) {
  std::vector<PropertyCheck> checks;
  const std::vector<double> targets = {0.15, 0.3, 0.5, 0.64, 0.85};

  if (rule.kind() == RaKind::kDawd) {
    PropertyCheck monotone = pass("nonincreasing in the allocation proportion");
    PropertyCheck range = pass("probabilities inside [0,1]");
    for (double diff : {-0.8, -0.3, 0.0, 0.4, 0.9}) {
      const std::vector<double> estimate = {0.5 + diff / 2.0, 0.5 - diff / 2.0};
      const ScalarMap map = rule.allocation_map(estimate);
      const PropertyCheck m = check_map_monotone(map);
      const PropertyCheck r = check_map_range(map);
      if (!m.passed) monotone = fail(monotone.name, m.detail);
      if (!r.passed) range = fail(range.name, r.detail);
    }
    checks.push_back(range);
    checks.push_back(monotone);
    return checks;
  }

  PropertyCheck monotone = pass("nonincreasing in the allocation proportion at every target");
  PropertyCheck range = pass("probabilities inside [0,1] at every target");
  for (double y : targets) {
    const ScalarMap map{[&rule, y](double x) { return rule.probability_from_target(x, y); }, true};
    const PropertyCheck m = check_map_monotone(map);
    const PropertyCheck r = check_map_range(map);
    if (!m.passed) monotone = fail(monotone.name, "target " + std::to_string(y) + ": " + m.detail);
    if (!r.passed) range = fail(range.name, "target " + std::to_string(y) + ": " + r.detail);
  }
  checks.push_back(range);
  checks.push_back(monotone);

  PropertyCheck crossing = pass("generalized downcrossing sits at the target");
  for (double y : targets) {
    const ScalarMap map{[&rule, y](double x) { return rule.probability_from_target(x, y); }, true};
    const DowncrossingCheck dc = verify_downcrossing(map, y, 801, 1e-9);
    if (!dc.ok) {
      crossing = fail(crossing.name, "target " + std::to_string(y) + ", " +
                                         point(dc.violations.front().x,
                                               dc.violations.front().value));
      break;
    }
  }
  checks.push_back(crossing);

  if (rule.kind() == RaKind::kDbcd) {
    PropertyCheck diagonal = pass("phi(x; x) = x");
    PropertyCheck increasing = pass("increasing in the target");
    PropertyCheck symmetric = pass("phi(x; y) = 1 - phi(1-x; 1-y)");
    PropertyCheck forcing = pass("forces toward the target");
    for (int i = 1; i < 20; ++i) {
      const double x = i / 20.0;
      if (std::abs(rule.probability_from_target(x, x) - x) > 1e-12)
        diagonal = fail(diagonal.name, point(x, rule.probability_from_target(x, x)));
      for (int k = 1; k < 20; ++k) {
        const double y = k / 20.0;
        const double v = rule.probability_from_target(x, y);
        if (k > 1) {
          const double prev = rule.probability_from_target(x, (k - 1) / 20.0);
          if (v < prev - 1e-12)
            increasing = fail(increasing.name, "x=" + std::to_string(x) + " y=" + std::to_string(y));
        }
        const double mirrored = 1.0 - rule.probability_from_target(1.0 - x, 1.0 - y);
        if (std::abs(v - mirrored) > 1e-12)
          symmetric = fail(symmetric.name, "x=" + std::to_string(x) + " y=" + std::to_string(y));
        if (x > y + 1e-12 && !(v < y + 1e-12))
          forcing = fail(forcing.name, "x=" + std::to_string(x) + " y=" + std::to_string(y));
        if (x < y - 1e-12 && !(v > y - 1e-12))
          forcing = fail(forcing.name, "x=" + std::to_string(x) + " y=" + std::to_string(y));
      }
    }
    checks.push_back(diagonal);
    checks.push_back(increasing);
    checks.push_back(symmetric);
    checks.push_back(forcing);
  }

  if (rule.kind() == RaKind::kPowerRule) {
    PropertyCheck bracket = pass("target^tau <= target <= target^(1/tau)");
    for (double y : targets) {
      const double below = rule.probability_from_target(y + 1e-6, y);
      const double above = rule.probability_from_target(y - 1e-6, y);
      if (!(below <= y && y <= above)) bracket = fail(bracket.name, "target " + std::to_string(y));
    }
    checks.push_back(bracket);
  }

  (void)rng;
  return checks;
}

std::vector<PropertyCheck> verify_cara(const CaraRule& rule, Rng& rng) {
  std::vector<PropertyCheck> checks;
  const std::vector<double> eth_estimate = {0.4, 0.1, 0.7, -0.2};

  switch (rule.kind()) {
    case CaraKind::kEth: {
      PropertyCheck values = pass("indicator values in {0, 1/2, 1}");
      PropertyCheck constant = pass("constant in the allocation proportion");
      for (int i = 0; i < 200; ++i) {
        const double z = 3.0 * (rng.next_double() * 2.0 - 1.0);
        const double v = rule.probability(rng.next_double(), eth_estimate, z);
        if (v != 0.0 && v != 0.5 && v != 1.0) values = fail(values.name, point(z, v));
        if (v != rule.probability(rng.next_double(), eth_estimate, z))
          constant = fail(constant.name, point(z, v));
      }
      checks.push_back(values);
      checks.push_back(constant);
      break;
    }
    case CaraKind::kZhangTarget: {
      PropertyCheck range = pass("target values strictly inside (0,1)");
      const std::vector<double> estimate = {0.7, 0.5};
      for (int i = 0; i < 200; ++i) {
        const double z = 3.0 * (rng.next_double() * 2.0 - 1.0);
        const double v = rule.probability(rng.next_double(), estimate, z);
        if (!(v > 0.0 && v < 1.0)) range = fail(range.name, point(z, v));
      }
      checks.push_back(range);
      break;
    }
    case CaraKind::kZhangHu: {
      PropertyCheck identity = pass("phi(y; y, b) = b on a 50x50 grid");
      PropertyCheck decreasing = pass("decreasing in the allocation proportion");
      for (int i = 1; i < 50 && identity.passed; ++i) {
        for (int k = 1; k < 50; ++k) {
          const double y = i / 50.0;
          const double b = k / 50.0;
          const double v = CaraRule::zhang_hu_map(y, y, b, rule.nu());
          if (std::abs(v - b) > 1e-12) {
            identity = fail(identity.name, "y=" + std::to_string(y) + " b=" + std::to_string(b) +
                                               " -> " + std::to_string(v));
            break;
          }
        }
      }
      for (double a : {0.3, 0.6}) {
        for (double b : {0.25, 0.7}) {
          const ScalarMap map{
              [&rule, a, b](double x) { return CaraRule::zhang_hu_map(x, a, b, rule.nu()); }, true};
          const PropertyCheck m = check_map_monotone(map);
          if (!m.passed) decreasing = fail(decreasing.name, m.detail);
        }
      }
      checks.push_back(identity);
      checks.push_back(decreasing);
      break;
    }
  }
  return checks;
}

std::vector<PropertyCheck> verify_strata(const StrataRule& rule, Rng& rng) {
  std::vector<PropertyCheck> checks;
  const bool rdbcd = rule.kind() == StrataKind::kRdbcd;
  const int levels_t = 2;
  const int levels_w = 2;

  if (rule.kind() == StrataKind::kAtkinsonGeneral) {
    PropertyCheck range = pass("probabilities inside [0,1]");
    PropertyCheck monotone = pass("nonincreasing in the stratum allocation");
    for (int trial = 0; trial < 40; ++trial) {
      AtkinsonAccumulator low(levels_t, levels_w, rule.accumulator_interactions());
      AtkinsonAccumulator high(levels_t, levels_w, rule.accumulator_interactions());
      const Stratum cell{static_cast<int>(rng.next_below(levels_t)),
                         static_cast<int>(rng.next_below(levels_w))};
      bool flipped = false;
      for (int i = 0; i < 60; ++i) {
        const Stratum s{static_cast<int>(rng.next_below(levels_t)),
                        static_cast<int>(rng.next_below(levels_w))};
        const int arm = rng.bernoulli(0.5) ? 0 : 1;
        low.add(s, arm);
        if (!flipped && arm == 1 && s == cell) {
          high.add(s, 0);
          flipped = true;
        } else {
          high.add(s, arm);
        }
      }
      const double v_low = rule.probability(low, cell);
      const double v_high = rule.probability(high, cell);
      if (!(v_low >= 0.0 && v_low <= 1.0)) range = fail(range.name, std::to_string(v_low));
      if (flipped && v_high > v_low + 1e-9)
        monotone = fail(monotone.name,
                        std::to_string(v_low) + " -> " + std::to_string(v_high));
    }
    checks.push_back(range);
    checks.push_back(monotone);
    return checks;
  }

  PropertyCheck range = pass("probabilities inside [0,1]");
  for (int trial = 0; trial < 200; ++trial) {
    const StratumTable table = random_table(rng, levels_t, levels_w, 40);
    const Stratum s{static_cast<int>(rng.next_below(levels_t)),
                    static_cast<int>(rng.next_below(levels_w))};
    const double v = rule.probability(table, s);
    if (!(v >= 0.0 && v <= 1.0)) range = fail(range.name, std::to_string(v));
  }
  checks.push_back(range);

  PropertyCheck monotone = pass("nonincreasing in the stratum allocation proportion");
  for (int trial = 0; trial < 60; ++trial) {
    const Stratum cell{static_cast<int>(rng.next_below(levels_t)),
                       static_cast<int>(rng.next_below(levels_w))};
    StratumTable low(levels_t, levels_w), high(levels_t, levels_w);
    if (!build_flip_pair(rng, levels_t, levels_w, 40, cell, low, high)) continue;
    const double v_low = rule.probability(low, cell);
    const double v_high = rule.probability(high, cell);
    if (v_high > v_low + 1e-9)
      monotone =
          fail(monotone.name, std::to_string(v_low) + " -> " + std::to_string(v_high) +
                                  " after raising the cell's arm-A count");
  }
  checks.push_back(monotone);

  if (rule.kind() == StrataKind::kPocockSimon || rule.kind() == StrataKind::kHuHu) {
    PropertyCheck balanced = pass("exactly 1/2 on fully balanced tables");
    for (int trial = 0; trial < 20; ++trial) {
      StratumTable table(levels_t, levels_w);
      for (int j = 0; j < levels_t; ++j)
        for (int l = 0; l < levels_w; ++l) {
          const long pairs = 1 + static_cast<long>(rng.next_below(8));
          for (long i = 0; i < pairs; ++i) {
            table = table.updated({j, l}, 0);
            table = table.updated({j, l}, 1);
          }
        }
      for (int j = 0; j < levels_t; ++j)
        for (int l = 0; l < levels_w; ++l)
          if (rule.probability(table, {j, l}) != 0.5)
            balanced = fail(balanced.name, "stratum " + std::to_string(j) + ":" + std::to_string(l));
    }
    checks.push_back(balanced);
  }

  if (rule.kind() == StrataKind::kCAbcd) {
    PropertyCheck symmetric = pass("coin family satisfies F(-x) = 1 - F(x)");
    for (long d = 1; d <= 6; ++d) {
      StratumTable plus(levels_t, levels_w), minus(levels_t, levels_w);
      const Stratum cell{0, 0};
      for (long i = 0; i < d; ++i) {
        plus = plus.updated(cell, 0);
        minus = minus.updated(cell, 1);
      }
      for (int j = 0; j < levels_t; ++j)
        for (int l = 0; l < levels_w; ++l) {
          plus = plus.updated({j, l}, 0).updated({j, l}, 1);
          minus = minus.updated({j, l}, 0).updated({j, l}, 1);
        }
      const double total = rule.probability(plus, cell) + rule.probability(minus, cell);
      if (std::abs(total - 1.0) > 1e-12)
        symmetric = fail(symmetric.name, "D=" + std::to_string(d) + " sums to " +
                                             std::to_string(total));
    }
    checks.push_back(symmetric);
  }

  if (rdbcd) {
    PropertyCheck diagonal = pass("phi(x; x, z) = x");
    PropertyCheck monotone_xy = pass("decreasing in x, increasing in y");
    PropertyCheck freq_direction = pass("decreasing in z when x < y, increasing when x > y");
    PropertyCheck symmetric = pass("phi(x; y, z) = 1 - phi(1-x; 1-y, z)");
    const std::vector<double> grid = {0.15, 0.35, 0.5, 0.65, 0.85};
    for (double z : {0.1, 0.25, 0.6}) {
      for (double x : grid) {
        if (std::abs(StrataRule::rdbcd_map(x, x, z) - x) > 1e-12)
          diagonal = fail(diagonal.name, "x=" + std::to_string(x) + " z=" + std::to_string(z));
        for (double y : grid) {
          const double v = StrataRule::rdbcd_map(x, y, z);
          if (std::abs(v - (1.0 - StrataRule::rdbcd_map(1.0 - x, 1.0 - y, z))) > 1e-12)
            symmetric = fail(symmetric.name, "x=" + std::to_string(x) + " y=" + std::to_string(y));
          const double dx = StrataRule::rdbcd_map(x + 0.01, y, z);
          if (dx > v + 1e-12)
            monotone_xy = fail(monotone_xy.name, "x direction at x=" + std::to_string(x));
          const double dy = StrataRule::rdbcd_map(x, std::min(y + 0.01, 0.99), z);
          if (dy < v - 1e-12)
            monotone_xy = fail(monotone_xy.name, "y direction at y=" + std::to_string(y));
          const double dz = StrataRule::rdbcd_map(x, y, std::min(z + 0.05, 0.95));
          if (x < y - 1e-9 && dz > v + 1e-12)
            freq_direction = fail(freq_direction.name, "x<y at z=" + std::to_string(z));
          if (x > y + 1e-9 && dz < v - 1e-12)
            freq_direction = fail(freq_direction.name, "x>y at z=" + std::to_string(z));
        }
      }
    }
    checks.push_back(diagonal);
    checks.push_back(monotone_xy);
    checks.push_back(freq_direction);
    checks.push_back(symmetric);
  }

  return checks;
}

}  // namespace

PropertyCheck check_map_range(const ScalarMap& map, int grid) {
  if (!map.eval) return fail("map values inside [0,1]", "empty evaluator");
  for (int i = 0; i < grid; ++i) {
    const double x = static_cast<double>(i) / (grid - 1);
    const double v = map.eval(x);
    if (!(v >= 0.0 && v <= 1.0)) return fail("map values inside [0,1]", point(x, v));
  }
  return pass("map values inside [0,1]");
}

PropertyCheck check_map_monotone(const ScalarMap& map, int grid) {
  if (!map.eval) return fail("map nonincreasing", "empty evaluator");
  double prev_x = 0.0;
  double prev = map.eval(0.0);
  for (int i = 1; i < grid; ++i) {
    const double x = static_cast<double>(i) / (grid - 1);
    const double v = map.eval(x);
    if (v > prev + 1e-9)
      return fail("map nonincreasing",
                  point(prev_x, prev) + " then " + point(x, v));
    prev = v;
    prev_x = x;
  }
  return pass("map nonincreasing");
}

std::vector<PropertyCheck> verify_design(const DesignRule& design, std::uint64_t seed) {
  Rng rng(seed, 0);
  return std::visit(
      [&rng](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, AaRule>) {
          return verify_aa(rule, rng);
        } else if constexpr (std::is_same_v<T, RaRule>) {
          return verify_ra(rule, rng);
        } else if constexpr (std::is_same_v<T, CaraRule>) {
          return verify_cara(rule, rng);
        } else {
          return verify_strata(rule, rng);
        }
      },
      design);
}

}  // namespace allocsim
