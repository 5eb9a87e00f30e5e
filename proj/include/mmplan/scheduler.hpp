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

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mmplan/correction.hpp"
#include "mmplan/domain.hpp"
#include "mmplan/perf_model.hpp"
#include "mmplan/workload.hpp"

namespace mmplan {

// Per-item stage durations under a fixed plan, in seconds. Both are
// per-pipeline-stage values: module time divided by pp, with the encoder
// share scaled by l_dp / e_dp since e_dp encoder replicas serve the l_dp
// buckets of one microbatch slot.
struct ItemDurations {
  std::vector<double> e_dur;
  std::vector<double> l_dur;

  std::size_t size() const { return e_dur.size(); }
  double key(std::size_t i) const { return std::max(e_dur[i], l_dur[i]); }
  void push_back(double e, double l) {
    e_dur.push_back(e);
    l_dur.push_back(l);
  }
};

enum class SolverKind { kExact, kLpt };
enum class Optimality { kProven, kHeuristic };

std::string_view to_string(SolverKind solver);
std::string_view to_string(Optimality optimality);

struct Assignment {
  std::vector<std::vector<std::size_t>> buckets;  // item indices, ascending
  double c_max = 0.0;
  SolverKind solver = SolverKind::kLpt;
  Optimality optimality = Optimality::kHeuristic;
};

// max over buckets of max(sum e_dur, sum l_dur), summing in index order.
double bucket_c_max(const ItemDurations& durations,
                    const std::vector<std::vector<std::size_t>>& buckets);

// max(total_e / m, total_l / m, largest single item stage time).
double c_max_lower_bound(const ItemDurations& durations, std::size_t m);

// Bucket k runs as microbatch slot k / l_dp on LLM replica k % l_dp.
struct BucketSlot {
  std::size_t replica;
  std::size_t slot;
};
inline BucketSlot bucket_slot(std::size_t bucket, int l_dp) {
  return {bucket % static_cast<std::size_t>(l_dp),
          bucket / static_cast<std::size_t>(l_dp)};
}

ItemDurations compute_item_durations(std::span<const DataItem> items,
                                     const ParallelPlan& plan,
                                     const PerfProfile& profile,
                                     const ModelSpec& spec,
                                     const CorrectionTracker* tracker = nullptr);

// Exploration limit of the exact solver. Nodes are counted, so a node limit
// gives reproducible results; the wall-clock cap is for production runs.
struct SolveBudget {
  std::optional<std::uint64_t> max_nodes;
  std::optional<std::chrono::milliseconds> wall_limit;

  static SolveBudget unlimited() { return {}; }
  static SolveBudget nodes(std::uint64_t n) { return {n, std::nullopt}; }
};

struct ExactResult {
  Assignment assignment;  // optimum when completed, incumbent otherwise
  bool completed = false;
  std::uint64_t nodes = 0;
};

// Branch and bound over item -> bucket assignments minimizing C_max,
// seeded with the LPT assignment as incumbent.
ExactResult solve_exact(const ItemDurations& durations, std::size_t m,
                        const SolveBudget& budget = {});

// Longest processing time first: items by descending max(e_dur, l_dur),
// each placed on the bucket with the smallest max-stage load (lowest index
// on ties).
Assignment solve_lpt(const ItemDurations& durations, std::size_t m);

// Exact solve under the budget, falling back to the better of the incumbent
// and LPT when it does not finish. A zero node budget or zero wall limit
// skips the exact solver.
Assignment schedule_durations(const ItemDurations& durations, std::size_t m,
                              const SolveBudget& budget);

// Partitions a global batch into plan.buckets() microbatch buckets.
Assignment schedule_batch(std::span<const DataItem> batch,
                          const ParallelPlan& plan, const PerfProfile& profile,
                          const ModelSpec& spec,
                          const CorrectionTracker* tracker,
                          const SolveBudget& budget);

// Schedules batch t + 1 on a worker thread while `consume` handles batch t.
// The tracker is copied on the calling thread when a solve is launched, so
// `consume` may update it between batches.
void schedule_stream(
    std::span<const std::vector<DataItem>> batches, const ParallelPlan& plan,
    const PerfProfile& profile, const ModelSpec& spec,
    const CorrectionTracker* tracker, const SolveBudget& budget,
    const std::function<void(std::size_t, const Assignment&)>& consume);

}  // namespace mmplan
