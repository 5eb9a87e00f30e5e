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

#include <optional>
#include <span>
#include <vector>

#include "mmplan/domain.hpp"
#include "mmplan/perf_model.hpp"
#include "mmplan/workload.hpp"

namespace mmplan {

// Encoder and LLM degrees without the microbatch count.
struct ModuleConfig {
  ModuleParallel enc;
  ModuleParallel llm;

  auto operator<=>(const ModuleConfig&) const = default;
  ParallelPlan with_microbatches(int n_mb) const { return {enc, llm, n_mb}; }
};

// All (tp, pp, dp) with tp * pp * dp == gpus and tp <= gpus_per_node,
// ascending by tp then pp.
std::vector<ModuleParallel> find_combs(int gpus, int gpus_per_node);

// Every GPU split between the modules crossed with both sides' combs.
std::vector<ModuleConfig> enumerate_configs(const ClusterSpec& cluster);

// Number of configs enumerate_configs would produce, without building them.
std::size_t count_configs(const ClusterSpec& cluster);

struct StageDurations {
  double e_dur = 0.0;
  double l_dur = 0.0;
};

// Per-item shape that a microbatch is assumed to be made of.
struct ShapePoint {
  double enc_batch = 0.0;
  double llm_seq = 0.0;
  double llm_seq_sq = 0.0;  // squared length, for attention work

  static ShapePoint of(const DataItem& item);
  static ShapePoint mean_of(const ShapeDistribution& dist);
};

// Microbatch-level shapes for a config: t_bsz = enc_batch * gbs /
// (n_mb * e_dp) and t_seq = llm_seq * gbs / (n_mb * l_dp).
struct MicrobatchShape {
  double t_bsz = 0.0;
  double t_seq = 0.0;
  double instances = 0.0;  // LLM instances packed per microbatch
};
MicrobatchShape microbatch_shape(const ModuleConfig& config, int n_mb,
                                 const ShapePoint& point, int gbs);

// Per-stage forward durations of one microbatch made of `point`-shaped
// items: module FLOPs over (group throughput * pp).
StageDurations stage_durations_at(const ModuleConfig& config, int n_mb,
                                  const ShapePoint& point,
                                  const PerfProfile& profile,
                                  const ModelSpec& spec, int gbs);

// Mean-shape estimate used by the planner's default objective.
StageDurations estimate_stage_durations(const ModuleConfig& config, int n_mb,
                                        const ShapeDistribution& dist,
                                        const PerfProfile& profile,
                                        const ModelSpec& spec, int gbs);

// T = (n_mb + e_pp + l_pp - 1) * max(e_dur, l_dur).
double makespan(int e_pp, int l_pp, int n_mb, double e_dur, double l_dur);

// Mean over `sample` of the makespan evaluated at each item's own shape.
double expected_makespan(const ModuleConfig& config, int n_mb,
                         std::span<const DataItem> sample,
                         const PerfProfile& profile, const ModelSpec& spec,
                         int gbs);

enum class Objective { kMeanShape, kMonteCarlo };
enum class MemGuard { kMean, kQuantile };

struct PlannerOptions {
  Objective objective = Objective::kMeanShape;
  MemGuard mem_guard = MemGuard::kMean;
  double guard_quantile = 0.99;
};

struct PlanEvaluation {
  ParallelPlan plan;
  double est_e_dur = 0.0;
  double est_l_dur = 0.0;
  double est_makespan = 0.0;  // formula at the mean shapes
  double objective = 0.0;     // est_makespan, or the sample mean in MC mode
  double e_mem = 0.0;
  double l_mem = 0.0;
  bool feasible = false;
};

// Strict ordering used to pick the optimum: objective, then n_mb, then the
// plan tuple.
bool better_than(const PlanEvaluation& a, const PlanEvaluation& b);

// Everything the planner reads besides the config.
struct PlannerInputs {
  const ClusterSpec& cluster;
  const PerfProfile& profile;
  const ShapeDistribution& dist;
  const ModelSpec& spec;
  int gbs;
};

// Memory check and objective for one (config, n_mb) instance. Infeasible
// instances carry their memory footprints but no durations.
PlanEvaluation evaluate_instance(const ModuleConfig& config, int n_mb,
                                 const PlannerInputs& in,
                                 const PlannerOptions& options = {});

class NoFeasiblePlan : public std::runtime_error {
 public:
  NoFeasiblePlan(const std::string& what, double tightest_ratio)
      : std::runtime_error(what), tightest_ratio_(tightest_ratio) {}
  // Smallest max(e_mem, l_mem) / mem_per_gpu seen (> 1 by definition).
  double tightest_ratio() const { return tightest_ratio_; }

 private:
  double tightest_ratio_;
};

// Exhaustive search for the best feasible (config, n_mb). Uses the
// OpenMP kernel; the result does not depend on the thread count.
PlanEvaluation optimize(const PlannerInputs& in,
                        const PlannerOptions& options = {});

// Serial reference: the literal two-phase loop over enumerate_configs and
// every n_mb in [1, gbs / l_dp], calling evaluate_instance per instance.
PlanEvaluation optimize_reference(const PlannerInputs& in,
                                  const PlannerOptions& options = {});

// All feasible instances, best first.
std::vector<PlanEvaluation> rank_feasible(const PlannerInputs& in,
                                          const PlannerOptions& options = {});

}  // namespace mmplan
