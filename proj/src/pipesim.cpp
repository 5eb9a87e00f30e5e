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

#include "mmplan/pipesim.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace mmplan {
namespace {

struct Op {
  PassKind kind;
  std::size_t mb;
};

std::vector<Op> one_f_one_b_order(std::size_t stage, std::size_t p,
                                  std::size_t m) {
  const std::size_t warmup = std::min(p - 1 - stage, m);
  std::vector<Op> ops;
  ops.reserve(2 * m);
  for (std::size_t i = 0; i < warmup; ++i) ops.push_back({PassKind::kForward, i});
  for (std::size_t j = 0; j + warmup < m; ++j) {
    ops.push_back({PassKind::kForward, warmup + j});
    ops.push_back({PassKind::kBackward, j});
  }
  for (std::size_t j = m - warmup; j < m; ++j) {
    ops.push_back({PassKind::kBackward, j});
  }
  return ops;
}

}  // namespace

StageTimes::StageTimes(std::size_t stages, std::size_t microbatches)
    : stages_(stages),
      microbatches_(microbatches),
      forward_(stages * microbatches, 0.0) {}

StageTimes::StageTimes(std::size_t stages, std::size_t microbatches,
                       std::vector<double> forward)
    : stages_(stages), microbatches_(microbatches), forward_(std::move(forward)) {
  if (forward_.size() != stages * microbatches) {
    throw InputError("stage duration matrix has " +
                     std::to_string(forward_.size()) + " entries, expected " +
                     std::to_string(stages * microbatches));
  }
}

StageTimes StageTimes::uniform(std::size_t stages, std::size_t microbatches,
                               double d) {
  return {stages, microbatches, std::vector<double>(stages * microbatches, d)};
}

double StageTimes::total() const {
  return std::accumulate(forward_.begin(), forward_.end(), 0.0);
}

SimTrace simulate_1f1b(const StageTimes& times, const SimOptions& options) {
  const std::size_t p = times.stages();
  const std::size_t m = times.microbatches();
  if (p == 0) throw InputError("pipeline needs at least one stage");
  if (options.backward_ratio < 0.0 || options.hop_latency < 0.0) {
    throw InputError("backward ratio and hop latency must be >= 0");
  }
  for (std::size_t s = 0; s < p; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      if (!(times.at(s, i) >= 0.0)) {
        throw InputError("stage durations must be >= 0");
      }
    }
  }

  std::vector<std::vector<Op>> order(p);
  for (std::size_t s = 0; s < p; ++s) order[s] = one_f_one_b_order(s, p, m);

  constexpr double kPending = -1.0;
  std::vector<double> fwd_end(p * m, kPending);
  std::vector<double> bwd_end(p * m, kPending);
  std::vector<std::size_t> next(p, 0);
  std::vector<double> free_at(p, 0.0);
  std::vector<std::vector<SimEvent>> per_stage(p);

  std::size_t remaining = 2 * p * m;
  while (remaining > 0) {
    bool progressed = false;
    for (std::size_t s = 0; s < p; ++s) {
      while (next[s] < order[s].size()) {
        const Op op = order[s][next[s]];
        double ready = 0.0;
        if (op.kind == PassKind::kForward) {
          if (s > 0) {
            const double dep = fwd_end[(s - 1) * m + op.mb];
            if (dep == kPending) break;
            ready = dep + options.hop_latency;
          }
        } else if (s + 1 < p) {
          const double dep = bwd_end[(s + 1) * m + op.mb];
          if (dep == kPending) break;
          ready = dep + options.hop_latency;
        } else {
          const double dep = fwd_end[s * m + op.mb];
          if (dep == kPending) break;
          ready = dep;
        }
        const double f = times.at(s, op.mb);
        const double dur =
            op.kind == PassKind::kForward ? f : options.backward_ratio * f;
        const double start = std::max(free_at[s], ready);
        const double end = start + dur;
        free_at[s] = end;
        (op.kind == PassKind::kForward ? fwd_end : bwd_end)[s * m + op.mb] = end;
        per_stage[s].push_back({s, op.mb, op.kind, start, end});
        ++next[s];
        --remaining;
        progressed = true;
      }
    }
    if (!progressed) throw std::logic_error("1F1B schedule deadlocked");
  }

  SimTrace trace;
  trace.stage_busy.assign(p, 0.0);
  for (std::size_t s = 0; s < p; ++s) {
    for (const SimEvent& ev : per_stage[s]) {
      trace.stage_busy[s] += ev.end - ev.start;
      trace.makespan = std::max(trace.makespan, ev.end);
    }
    trace.events.insert(trace.events.end(), per_stage[s].begin(),
                        per_stage[s].end());
  }
  trace.stage_idle.resize(p);
  double busy = 0.0;
  double idle = 0.0;
  for (std::size_t s = 0; s < p; ++s) {
    trace.stage_idle[s] = trace.makespan - trace.stage_busy[s];
    busy += trace.stage_busy[s];
    idle += trace.stage_idle[s];
  }
  trace.idle_fraction = busy > 0.0 ? idle / busy : 0.0;
  return trace;
}

SimTrace simulate_1f1b(const ParallelPlan& plan, const StageTimes& times,
                       const SimOptions& options) {
  if (times.stages() != static_cast<std::size_t>(plan.pipeline_depth()) ||
      times.microbatches() != static_cast<std::size_t>(plan.n_mb)) {
    throw InputError("stage duration matrix does not match the plan");
  }
  return simulate_1f1b(times, options);
}

double ideal_bubble_fraction(std::size_t p, std::size_t m) {
  if (p < 1 || m < 1) throw InputError("p and m must be >= 1");
  return static_cast<double>(p - 1) / static_cast<double>(m);
}

std::vector<StageTimes> schedule_stage_times(const ParallelPlan& plan,
                                             const Assignment& assignment,
                                             const ItemDurations& durations) {
  const auto m = static_cast<std::size_t>(plan.buckets());
  if (assignment.buckets.size() != m) {
    throw InputError("assignment has " +
                     std::to_string(assignment.buckets.size()) +
                     " buckets, plan needs " + std::to_string(m));
  }
  const auto replicas = static_cast<std::size_t>(plan.llm.dp);
  const auto stages = static_cast<std::size_t>(plan.pipeline_depth());
  const auto e_pp = static_cast<std::size_t>(plan.enc.pp);
  std::vector<StageTimes> out(replicas,
                              StageTimes(stages, static_cast<std::size_t>(plan.n_mb)));
  for (std::size_t k = 0; k < m; ++k) {
    double e = 0.0;
    double l = 0.0;
    for (std::size_t i : assignment.buckets[k]) {
      if (i >= durations.size()) throw InputError("bucket references a missing item");
      e += durations.e_dur[i];
      l += durations.l_dur[i];
    }
    const BucketSlot where = bucket_slot(k, plan.llm.dp);
    for (std::size_t s = 0; s < stages; ++s) {
      out[where.replica].at(s, where.slot) = s < e_pp ? e : l;
    }
  }
  return out;
}

ScheduleSimulation evaluate_schedule(const ParallelPlan& plan,
                                     const Assignment& assignment,
                                     const ItemDurations& durations,
                                     const SimOptions& options) {
  ScheduleSimulation sim;
  for (const StageTimes& times : schedule_stage_times(plan, assignment, durations)) {
    sim.replicas.push_back(simulate_1f1b(times, options));
    sim.makespan = std::max(sim.makespan, sim.replicas.back().makespan);
  }
  for (const SimTrace& t : sim.replicas) {
    for (double b : t.stage_busy) {
      sim.busy += b;
      sim.idle += sim.makespan - b;
    }
  }
  sim.idle_fraction = sim.busy > 0.0 ? sim.idle / sim.busy : 0.0;
  return sim;
}

ScheduleSimulation evaluate_schedule(const ParallelPlan& plan,
                                     const Assignment& assignment,
                                     std::span<const DataItem> items,
                                     const PerfProfile& profile,
                                     const ModelSpec& spec,
                                     const SimOptions& options) {
  return evaluate_schedule(
      plan, assignment, compute_item_durations(items, plan, profile, spec),
      options);
}

Assignment random_partition(std::size_t items, std::size_t m,
                            std::uint64_t seed, const ItemDurations* durations) {
  if (m == 0) throw InputError("bucket count must be >= 1");
  std::vector<std::size_t> perm(items);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  Assignment a;
  a.buckets.resize(m);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t count = items / m + (k < items % m ? 1 : 0);
    a.buckets[k].assign(perm.begin() + pos, perm.begin() + pos + count);
    std::sort(a.buckets[k].begin(), a.buckets[k].end());
    pos += count;
  }
  if (durations != nullptr) a.c_max = bucket_c_max(*durations, a.buckets);
  a.solver = SolverKind::kLpt;
  a.optimality = Optimality::kHeuristic;
  return a;
}

}  // namespace mmplan
