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

#include "mmplan/planner.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "planner_internal.hpp"

namespace mmplan {

std::vector<ModuleParallel> find_combs(int gpus, int gpus_per_node) {
  std::vector<ModuleParallel> combs;
  if (gpus < 1) return combs;
  for (int tp = 1; tp <= std::min(gpus, gpus_per_node); ++tp) {
    if (gpus % tp != 0) continue;
    const int rest = gpus / tp;
    for (int pp = 1; pp <= rest; ++pp) {
      if (rest % pp != 0) continue;
      combs.push_back({tp, pp, rest / pp});
    }
  }
  return combs;
}

std::vector<ModuleConfig> enumerate_configs(const ClusterSpec& cluster) {
  std::vector<ModuleConfig> configs;
  for (int e_gpus = 1; e_gpus <= cluster.n_gpus - 1; ++e_gpus) {
    const auto e_combs = find_combs(e_gpus, cluster.gpus_per_node);
    const auto l_combs =
        find_combs(cluster.n_gpus - e_gpus, cluster.gpus_per_node);
    for (const ModuleParallel& e : e_combs) {
      for (const ModuleParallel& l : l_combs) configs.push_back({e, l});
    }
  }
  return configs;
}

std::size_t count_configs(const ClusterSpec& cluster) {
  std::vector<std::size_t> per_gpus(std::max(cluster.n_gpus, 1), 0);
  for (int g = 1; g < cluster.n_gpus; ++g) {
    per_gpus[g] = find_combs(g, cluster.gpus_per_node).size();
  }
  std::size_t total = 0;
  for (int e = 1; e < cluster.n_gpus; ++e) {
    total += per_gpus[e] * per_gpus[cluster.n_gpus - e];
  }
  return total;
}

ShapePoint ShapePoint::of(const DataItem& item) {
  const double s = static_cast<double>(item.llm_seq_len);
  return {static_cast<double>(item.enc_batch), s, s * s};
}

ShapePoint ShapePoint::mean_of(const ShapeDistribution& dist) {
  return {dist.mean_enc_batch, dist.mean_llm_seq,
          dist.mean_llm_seq * dist.mean_llm_seq};
}

MicrobatchShape microbatch_shape(const ModuleConfig& config, int n_mb,
                                 const ShapePoint& point, int gbs) {
  return {detail::scaled_shape(point.enc_batch, gbs, n_mb, config.enc.dp),
          detail::scaled_shape(point.llm_seq, gbs, n_mb, config.llm.dp),
          detail::scaled_shape(1.0, gbs, n_mb, config.llm.dp)};
}

StageDurations stage_durations_at(const ModuleConfig& config, int n_mb,
                                  const ShapePoint& point,
                                  const PerfProfile& profile,
                                  const ModelSpec& spec, int gbs) {
  if (n_mb < 1 || gbs < 1) throw InputError("n_mb and gbs must be >= 1");
  const MicrobatchShape shape = microbatch_shape(config, n_mb, point, gbs);
  const detail::EncoderWork enc =
      detail::encoder_work(profile, spec, config.enc.tp, shape.t_bsz);
  const double llm = detail::llm_work(profile, spec, config.llm.tp, shape,
                                      point.llm_seq_sq);
  return {detail::per_stage(enc.flops, enc.thr, config.enc.pp),
          llm / config.llm.pp};
}

StageDurations estimate_stage_durations(const ModuleConfig& config, int n_mb,
                                        const ShapeDistribution& dist,
                                        const PerfProfile& profile,
                                        const ModelSpec& spec, int gbs) {
  return stage_durations_at(config, n_mb, ShapePoint::mean_of(dist), profile,
                            spec, gbs);
}

double makespan(int e_pp, int l_pp, int n_mb, double e_dur, double l_dur) {
  return static_cast<double>(n_mb + e_pp + l_pp - 1) * std::max(e_dur, l_dur);
}

double expected_makespan(const ModuleConfig& config, int n_mb,
                         std::span<const DataItem> sample,
                         const PerfProfile& profile, const ModelSpec& spec,
                         int gbs) {
  if (sample.empty()) throw InputError("expected_makespan needs a sample");
  double sum = 0.0;
  for (const DataItem& d : sample) {
    const StageDurations dur = stage_durations_at(
        config, n_mb, ShapePoint::of(d), profile, spec, gbs);
    sum += makespan(config.enc.pp, config.llm.pp, n_mb, dur.e_dur, dur.l_dur);
  }
  return sum / static_cast<double>(sample.size());
}

bool better_than(const PlanEvaluation& a, const PlanEvaluation& b) {
  if (a.objective != b.objective) return a.objective < b.objective;
  if (a.plan.n_mb != b.plan.n_mb) return a.plan.n_mb < b.plan.n_mb;
  return a.plan < b.plan;
}

namespace detail {

ShapePoint guard_point(const ShapeDistribution& dist,
                       const PlannerOptions& options) {
  if (options.mem_guard == MemGuard::kMean) return ShapePoint::mean_of(dist);
  const double b = dist.enc_batch_quantile(options.guard_quantile);
  const double s = dist.llm_seq_quantile(options.guard_quantile);
  return {b, s, s * s};
}

void check_inputs(const PlannerInputs& in) {
  in.cluster.check();
  in.spec.check();
  in.profile.check(in.cluster.gpus_per_node);
  if (in.gbs < 1) throw InputError("global batch size must be >= 1");
  if (in.dist.sample.empty()) {
    throw InputError("shape distribution has an empty sample");
  }
}

[[noreturn]] void throw_infeasible(bool any_instance, double tightest) {
  if (!any_instance) {
    throw NoFeasiblePlan(
        "no feasible configuration: gbs is smaller than every l_dp", 0.0);
  }
  throw NoFeasiblePlan(
      "no feasible configuration: tightest instance needs " +
          std::to_string(tightest) + "x the per-GPU memory",
      tightest);
}

}  // namespace detail

PlanEvaluation evaluate_instance(const ModuleConfig& config, int n_mb,
                                 const PlannerInputs& in,
                                 const PlannerOptions& options) {
  PlanEvaluation ev;
  ev.plan = config.with_microbatches(n_mb);
  const MicrobatchShape mem_shape = microbatch_shape(
      config, n_mb, detail::guard_point(in.dist, options), in.gbs);
  ev.e_mem = encoder_memory(in.profile, ev.plan, in.spec, mem_shape.t_bsz);
  ev.l_mem = llm_memory(in.profile, ev.plan, in.spec, mem_shape.t_seq);
  if (ev.e_mem > in.cluster.mem_per_gpu || ev.l_mem > in.cluster.mem_per_gpu) {
    ev.feasible = false;
    return ev;
  }
  ev.feasible = true;
  const StageDurations dur = estimate_stage_durations(
      config, n_mb, in.dist, in.profile, in.spec, in.gbs);
  ev.est_e_dur = dur.e_dur;
  ev.est_l_dur = dur.l_dur;
  ev.est_makespan =
      makespan(config.enc.pp, config.llm.pp, n_mb, dur.e_dur, dur.l_dur);
  ev.objective = options.objective == Objective::kMeanShape
                     ? ev.est_makespan
                     : expected_makespan(config, n_mb, in.dist.sample,
                                         in.profile, in.spec, in.gbs);
  return ev;
}

PlanEvaluation optimize_reference(const PlannerInputs& in,
                                  const PlannerOptions& options) {
  detail::check_inputs(in);
  std::optional<PlanEvaluation> best;
  bool any_instance = false;
  double tightest = std::numeric_limits<double>::infinity();
  for (const ModuleConfig& config : enumerate_configs(in.cluster)) {
    const int max_mb = in.gbs / config.llm.dp;
    for (int n_mb = 1; n_mb <= max_mb; ++n_mb) {
      any_instance = true;
      const PlanEvaluation ev = evaluate_instance(config, n_mb, in, options);
      if (!ev.feasible) {
        tightest = std::min(
            tightest, std::max(ev.e_mem, ev.l_mem) / in.cluster.mem_per_gpu);
        continue;
      }
      if (!best || better_than(ev, *best)) best = ev;
    }
  }
  if (!best) detail::throw_infeasible(any_instance, tightest);
  return *best;
}

std::vector<PlanEvaluation> rank_feasible(const PlannerInputs& in,
                                          const PlannerOptions& options) {
  detail::check_inputs(in);
  std::vector<PlanEvaluation> out;
  for (const ModuleConfig& config : enumerate_configs(in.cluster)) {
    const int max_mb = in.gbs / config.llm.dp;
    for (int n_mb = 1; n_mb <= max_mb; ++n_mb) {
      PlanEvaluation ev = evaluate_instance(config, n_mb, in, options);
      if (ev.feasible) out.push_back(ev);
    }
  }
  std::sort(out.begin(), out.end(), better_than);
  return out;
}

}  // namespace mmplan
