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

#include <benchmark/benchmark.h>

#include <cmath>

#include "allocsim/designs_cara.hpp"
#include "allocsim/downcrossing.hpp"
#include "allocsim/sim.hpp"

using namespace allocsim;

namespace {

void BM_FindDowncrossingSmooth(benchmark::State& state) {
  const ScalarMap map{[](double x) { return 1.0 - x * x; }, true};
  for (auto _ : state) benchmark::DoNotOptimize(find_downcrossing(map).value());
}
BENCHMARK(BM_FindDowncrossingSmooth);

void BM_FindDowncrossingStep(benchmark::State& state) {
  const ScalarMap map = AaRule::efron(0.75).allocation_map();
  for (auto _ : state) benchmark::DoNotOptimize(find_downcrossing(map).value());
}
BENCHMARK(BM_FindDowncrossingStep);

void BM_VectorialDowncrossing(benchmark::State& state) {
  const VectorMap map = AaRule::wei_multi_odds(static_cast<int>(state.range(0)))
                            .allocation_map_multi();
  for (auto _ : state) benchmark::DoNotOptimize(find_vectorial_downcrossing(map).point[0]);
}
BENCHMARK(BM_VectorialDowncrossing)->Arg(3)->Arg(8);

void BM_TrialEfron(benchmark::State& state) {
  TrialConfig config;
  config.design = AaRule::efron(0.75);
  config.horizon = state.range(0);
  config.seed = 7;
  config.record_stride = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(config).final_state.count(0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrialEfron)->Arg(1000)->Arg(10000);

void BM_TrialDbcd(benchmark::State& state) {
  TrialConfig config;
  config.design = RaRule::dbcd(2.0, TargetFunction::neyman());
  config.response = BinaryModel{0.7, 0.5};
  config.horizon = state.range(0);
  config.initial_per_arm = 5;
  config.seed = 7;
  config.record_stride = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(config).final_state.count(0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrialDbcd)->Arg(1000)->Arg(10000);

void BM_TrialPocockSimon(benchmark::State& state) {
  TrialConfig config;
  config.design = StrataRule::pocock_simon(0.8);
  config.covariates = CategoricalCovariateModel{2, 2, {0.25, 0.25, 0.25, 0.25}};
  config.horizon = state.range(0);
  config.seed = 7;
  config.record_stride = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(config).final_state.count(0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrialPocockSimon)->Arg(1000)->Arg(10000);

void BM_AveragedRule(benchmark::State& state) {
  const CaraRule rule = CaraRule::zhang_hu(2.0, TargetFunction::constant(0.6));
  Rng rng(13, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        averaged_rule(rule, 0.45, {}, 0.55, NormalCovariateModel{}, state.range(0), rng).mean);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AveragedRule)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
