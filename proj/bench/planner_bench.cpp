/* Copyright 2026 The mmplan Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Planner kernel vs serial reference, and scheduler solvers.

#include <benchmark/benchmark.h>

#include <random>

#include "mmplan/perf_model.hpp"
#include "mmplan/planner.hpp"
#include "mmplan/scheduler.hpp"
#include "mmplan/workload.hpp"

namespace {

using namespace mmplan;

const ModelSpec kSpec{27, 32, 1152, 4096, 729};

std::vector<DataItem> items(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> batch(5.0);
  std::lognormal_distribution<double> seq(7.0, 0.8);
  std::vector<DataItem> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({std::to_string(i), batch(rng),
                   std::max<std::int64_t>(16, static_cast<std::int64_t>(seq(rng)))});
  }
  return out;
}

struct Fixture {
  ClusterSpec cluster;
  PerfProfile profile;
  ShapeDistribution dist;

  explicit Fixture(int gpus)
      : cluster{gpus, 8, 80.0 * double(1ull << 30)},
        profile(synth_profile(kSpec, cluster)),
        dist(build_distribution(items(2000, 1))) {}
};

void BM_PlannerReference(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const PlannerInputs in{f.cluster, f.profile, f.dist, kSpec, static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(optimize_reference(in));
}

void BM_PlannerKernel(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const PlannerInputs in{f.cluster, f.profile, f.dist, kSpec, static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(optimize(in));
}

BENCHMARK(BM_PlannerReference)->Args({64, 128})->Args({256, 512})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PlannerKernel)
    ->Args({64, 128})
    ->Args({256, 512})
    ->Args({1024, 512})
    ->Unit(benchmark::kMillisecond);

ItemDurations durations(std::size_t n) {
  std::mt19937_64 rng(n);
  std::lognormal_distribution<double> d(0.0, 0.9);
  ItemDurations out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(d(rng), d(rng));
  return out;
}

void BM_Lpt(benchmark::State& state) {
  const ItemDurations d = durations(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_lpt(d, 32));
}

void BM_Hybrid(benchmark::State& state) {
  const ItemDurations d = durations(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(schedule_durations(d, 32, SolveBudget::nodes(200000)));
  }
}

BENCHMARK(BM_Lpt)->Arg(256)->Arg(2048);
BENCHMARK(BM_Hybrid)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
