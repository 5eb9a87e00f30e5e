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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mmplan/domain.hpp"
#include "mmplan/perf_model.hpp"
#include "mmplan/scheduler.hpp"

namespace mmplan {

enum class PassKind { kForward, kBackward };

struct SimEvent {
  std::size_t stage;
  std::size_t microbatch;
  PassKind kind;
  double start;
  double end;
};

struct SimTrace {
  std::vector<SimEvent> events;  // per stage in execution order, stage-major
  double makespan = 0.0;
  std::vector<double> stage_busy;
  std::vector<double> stage_idle;  // makespan - busy
  double idle_fraction = 0.0;      // total idle / total busy
};

// Forward durations of every (stage, microbatch), stage-major.
class StageTimes {
 public:
  StageTimes(std::size_t stages, std::size_t microbatches);
  StageTimes(std::size_t stages, std::size_t microbatches,
             std::vector<double> forward);
  static StageTimes uniform(std::size_t stages, std::size_t microbatches,
                            double d);

  std::size_t stages() const { return stages_; }
  std::size_t microbatches() const { return microbatches_; }
  double& at(std::size_t stage, std::size_t mb) {
    return forward_[stage * microbatches_ + mb];
  }
  double at(std::size_t stage, std::size_t mb) const {
    return forward_[stage * microbatches_ + mb];
  }
  double total() const;

 private:
  std::size_t stages_;
  std::size_t microbatches_;
  std::vector<double> forward_;
};

struct SimOptions {
  double backward_ratio = 2.0;
  double hop_latency = 0.0;  // seconds per inter-stage transfer
};

// Non-interleaved 1F1B: stage s runs min(p - 1 - s, m) warm-up forwards,
// then alternates one forward and one backward, then drains backwards.
SimTrace simulate_1f1b(const StageTimes& times, const SimOptions& options = {});

// Same, checking that the matrix has e_pp + l_pp stages and n_mb
// microbatches.
SimTrace simulate_1f1b(const ParallelPlan& plan, const StageTimes& times,
                       const SimOptions& options = {});

// (p - 1) / m.
double ideal_bubble_fraction(std::size_t p, std::size_t m);

// One pipeline per LLM data-parallel replica.
struct ScheduleSimulation {
  std::vector<SimTrace> replicas;
  double makespan = 0.0;  // slowest replica
  double busy = 0.0;
  double idle = 0.0;  // against the iteration makespan, all replicas
  double idle_fraction = 0.0;
};

// Per-microbatch stage times of each replica: every encoder stage runs the
// bucket's summed e_dur, every LLM stage its summed l_dur (the durations are
// already per stage).
std::vector<StageTimes> schedule_stage_times(const ParallelPlan& plan,
                                             const Assignment& assignment,
                                             const ItemDurations& durations);

ScheduleSimulation evaluate_schedule(const ParallelPlan& plan,
                                     const Assignment& assignment,
                                     const ItemDurations& durations,
                                     const SimOptions& options = {});
ScheduleSimulation evaluate_schedule(const ParallelPlan& plan,
                                     const Assignment& assignment,
                                     std::span<const DataItem> items,
                                     const PerfProfile& profile,
                                     const ModelSpec& spec,
                                     const SimOptions& options = {});

// Seeded baseline: shuffled items dealt into m buckets of near-equal count.
Assignment random_partition(std::size_t items, std::size_t m,
                            std::uint64_t seed,
                            const ItemDurations* durations = nullptr);

// Item range [begin, end) held by one data-parallel group.
struct RouteRange {
  int group = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const RouteRange&) const = default;
};

// Encoder -> LLM activation routing through a single communicator rank.
// The gradient direction is the exact reverse (see reversed()).
struct RoutingPlan {
  int communicator = 0;            // encoder data group hosting the rank
  std::vector<RouteRange> gather;  // encoder group ranges into the rank
  std::vector<RouteRange> scatter; // ranges from the rank to LLM groups

  // Backward pass: gather from LLM groups, scatter to encoder groups.
  RoutingPlan reversed() const { return {communicator, scatter, gather}; }
};

// Contiguous, maximally equal split of [0, items) into `groups` ranges;
// the first items % groups ranges get one extra item.
std::vector<RouteRange> split_even(std::size_t items, int groups);

RoutingPlan plan_routing(int e_dp, int l_dp, std::size_t items_per_step);

}  // namespace mmplan
