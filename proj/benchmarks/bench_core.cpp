// Copyright 2026 The goldenrule Authors
// SPDX-License-Identifier: Apache-2.0
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

#include <random>

#include "fixtures.hpp"
#include "goldenrule/allocation.hpp"
#include "goldenrule/distributed.hpp"
#include "goldenrule/jackson_sim.hpp"

namespace {

using namespace goldenrule;

NetworkSpec sized_spec(std::size_t n) {
  std::mt19937_64 rng(n);
  return fixtures::random_feasible_spec(rng, n);
}

void BM_FlowBalance(benchmark::State& state) {
  const auto spec = sized_spec(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_flow_balance(spec));
}
BENCHMARK(BM_FlowBalance)->RangeMultiplier(4)->Range(4, 256);

void BM_PerronEigenpair(benchmark::State& state) {
  const auto spec = sized_spec(static_cast<std::size_t>(state.range(0)));
  const auto flow = solve_flow_balance(spec);
  for (auto _ : state) benchmark::DoNotOptimize(perron_eigenpair(flow.b_tilde));
}
BENCHMARK(BM_PerronEigenpair)->RangeMultiplier(4)->Range(4, 256);

void BM_Pipeline(benchmark::State& state) {
  const auto spec = sized_spec(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(golden_rule_pipeline(spec));
}
BENCHMARK(BM_Pipeline)->RangeMultiplier(4)->Range(4, 64);

void BM_DistributedRounds(benchmark::State& state) {
  const auto spec = sized_spec(static_cast<std::size_t>(state.range(0)));
  std::size_t rounds = 0;
  for (auto _ : state) {
    const auto r = run_until_converged(spec, 1e-9, 100'000);
    rounds = r.rounds_used;
    benchmark::DoNotOptimize(r.v);
  }
  state.counters["rounds"] = static_cast<double>(rounds);
}
BENCHMARK(BM_DistributedRounds)->Arg(3)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const auto result = golden_rule_pipeline(fixtures::three_peer());
  SimConfig config;
  config.spec = result.spec;
  config.mu0 = result.allocation.mu0;
  config.horizon = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t events = 0;
  for (auto _ : state) {
    const auto report = simulate(config);
    events = report.event_count;
    benchmark::DoNotOptimize(report.l_local);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(events) * state.iterations());
}
BENCHMARK(BM_Simulate)->Arg(100'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
