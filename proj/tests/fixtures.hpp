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

// Seeded random planner instances shared by unit and acceptance tests.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "mmplan/perf_model.hpp"
#include "mmplan/planner.hpp"
#include "mmplan/workload.hpp"

namespace mmplan::fixture {

struct PlannerCase {
  ClusterSpec cluster;
  ModelSpec spec;
  PerfProfile profile;
  ShapeDistribution dist;
  int gbs = 1;

  PlannerInputs inputs() const { return {cluster, profile, dist, spec, gbs}; }
};

inline std::vector<DataItem> random_items(std::size_t n, std::uint64_t seed,
                                          double mean_batch = 4.0,
                                          double mean_seq = 1500.0) {
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> batch(mean_batch);
  std::lognormal_distribution<double> seq(std::log(mean_seq) - 0.32, 0.8);
  std::vector<DataItem> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = static_cast<std::int64_t>(std::max(16.0, std::min(32768.0, seq(rng))));
    items.push_back({"item" + std::to_string(i), batch(rng), s});
  }
  return items;
}

inline PlannerCase random_planner_case(std::uint64_t seed, int min_gpus = 2,
                                       int max_gpus = 16, int max_gbs = 64) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  PlannerCase c;
  c.cluster.n_gpus = pick(min_gpus, max_gpus);
  const int nodes[] = {1, 2, 4, 8};
  do {
    c.cluster.gpus_per_node = nodes[pick(0, 3)];
  } while (c.cluster.gpus_per_node > c.cluster.n_gpus);
  c.cluster.mem_per_gpu = real(16.0, 80.0) * double(1ull << 30);
  c.spec = {pick(4, 32), pick(8, 48), 128 * pick(4, 16), 256 * pick(4, 16), pick(64, 729)};
  SynthParams params;
  params.peak_flops_per_gpu = real(50e12, 300e12);
  params.tp_efficiency = real(0.6, 0.95);
  params.enc_batch_half = real(1.0, 32.0);
  params.llm_seq_half = real(256.0, 8192.0);
  params.attn_efficiency = real(0.3, 0.9);
  c.profile = synth_profile(c.spec, c.cluster, params);
  c.dist = build_distribution(random_items(200, seed ^ 0x9e3779b97f4a7c15ull, real(1.0, 8.0),
                                           real(300.0, 4000.0)));
  c.gbs = pick(1, max_gbs);
  return c;
}

}  // namespace mmplan::fixture
