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

// OpenMP evaluation of the planner search space.
//
// The mean-shape objective separates into encoder-only and LLM-only terms
// that depend on (tp, dp, n_mb) through the microbatch shape and on pp
// through the layer split and the divisor. Interpolations are therefore
// cached per (tp, dp, n_mb), blended per (triple, n_mb) once per GPU split,
// and the cross product only does the memory check and the makespan. All
// values are produced by the same expressions as evaluate_instance.

#include <omp.h>

#include <algorithm>
#include <limits>
#include <optional>

#include "mmplan/planner.hpp"
#include "planner_internal.hpp"

namespace mmplan {
namespace {

struct Candidate {
  double objective = std::numeric_limits<double>::infinity();
  ParallelPlan plan;
  bool valid = false;

  bool beats(double t, const ParallelPlan& p) const {
    if (!valid) return false;
    if (objective != t) return objective < t;
    if (plan.n_mb != p.n_mb) return plan.n_mb < p.n_mb;
    return plan < p;
  }
  void offer(double t, const ParallelPlan& p) {
    if (valid && !(t <= objective)) return;
    Candidate c{t, p, true};
    if (!valid || c.beats(objective, plan)) *this = c;
  }
  void merge(const Candidate& o) {
    if (o.valid) offer(o.objective, o.plan);
  }
};

struct Search {
  Candidate best;
  bool any_instance = false;
  double tightest = std::numeric_limits<double>::infinity();

  void merge(const Search& o) {
    best.merge(o.best);
    any_instance = any_instance || o.any_instance;
    tightest = std::min(tightest, o.tightest);
  }
};

// Per-(tp, dp) tables indexed by n_mb - 1.
struct EncoderSlot {
  int tp = 0, dp = 0;
  std::vector<double> flops, thr, knots;  // knots: n_mb-major, K per entry
};
struct LlmSlot {
  int tp = 0, dp = 0;
  std::vector<double> work, knots;
};

class MeanShapeKernel {
 public:
  MeanShapeKernel(const PlannerInputs& in, const PlannerOptions& options)
      : in_(in),
        n_(in.cluster.n_gpus),
        node_(in.cluster.gpus_per_node),
        mean_(ShapePoint::mean_of(in.dist)),
        guard_(detail::guard_point(in.dist, options)),
        ke_(in.profile.e_act_state.axes()[0].coords.size()),
        kl_(in.profile.l_act_state.axes()[0].coords.size()) {
    combs_.resize(n_);
    for (int g = 1; g < n_; ++g) combs_[g] = find_combs(g, node_);
    build_slots();
  }

  Search run() const {
    Search total;
#pragma omp parallel
    {
      Search local;
#pragma omp for schedule(dynamic, 1) nowait
      for (int e = 1; e < n_; ++e) split(e, local);
#pragma omp critical
      total.merge(local);
    }
    return total;
  }

 private:
  int slot_index(int tp, int dp) const { return tp * (n_ + 1) + dp; }

  void build_slots() {
    std::vector<int> seen((node_ + 1) * (n_ + 1), -1);
    for (int g = 1; g < n_; ++g) {
      for (const ModuleParallel& c : combs_[g]) {
        int& s = seen[slot_index(c.tp, c.dp)];
        if (s >= 0) continue;
        s = static_cast<int>(enc_slots_.size());
        enc_slots_.push_back({c.tp, c.dp, {}, {}, {}});
        llm_slots_.push_back({c.tp, c.dp, {}, {}});
      }
    }
    slot_of_ = std::move(seen);

    const int gbs = in_.gbs;
    const PerfProfile& prof = in_.profile;
    const int count = static_cast<int>(enc_slots_.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (int s = 0; s < count; ++s) {
      EncoderSlot& es = enc_slots_[s];
      es.flops.resize(gbs);
      es.thr.resize(gbs);
      es.knots.resize(static_cast<std::size_t>(gbs) * ke_);
      for (int i = 1; i <= gbs; ++i) {
        const double t_bsz = detail::scaled_shape(mean_.enc_batch, gbs, i, es.dp);
        const detail::EncoderWork w =
            detail::encoder_work(prof, in_.spec, es.tp, t_bsz);
        es.flops[i - 1] = w.flops;
        es.thr[i - 1] = w.thr;
        const double rest[2] = {
            static_cast<double>(es.tp),
            detail::scaled_shape(guard_.enc_batch, gbs, i, es.dp)};
        prof.e_act_state.leading_knot_values(
            rest, std::span<double>(es.knots.data() + (i - 1) * ke_, ke_));
      }

      LlmSlot& ls = llm_slots_[s];
      const int max_mb = gbs / ls.dp;
      ls.work.resize(max_mb);
      ls.knots.resize(static_cast<std::size_t>(max_mb) * kl_);
      const ModuleConfig probe{{1, 1, 1}, {ls.tp, 1, ls.dp}};
      for (int i = 1; i <= max_mb; ++i) {
        const MicrobatchShape shape = microbatch_shape(probe, i, mean_, gbs);
        ls.work[i - 1] =
            detail::llm_work(prof, in_.spec, ls.tp, shape, mean_.llm_seq_sq);
        const double rest[2] = {
            static_cast<double>(ls.tp),
            detail::scaled_shape(guard_.llm_seq, gbs, i, ls.dp)};
        prof.l_act_state.leading_knot_values(
            rest, std::span<double>(ls.knots.data() + (i - 1) * kl_, kl_));
      }
    }
  }

  void split(int e, Search& out) const {
    const auto& e_combs = combs_[e];
    const auto& l_combs = combs_[n_ - e];
    int min_ldp = std::numeric_limits<int>::max();
    for (const ModuleParallel& l : l_combs) min_ldp = std::min(min_ldp, l.dp);
    const int max_mb = in_.gbs / min_ldp;
    if (max_mb < 1) return;
    out.any_instance = true;

    const PerfProfile& prof = in_.profile;
    const double mem_cap = in_.cluster.mem_per_gpu;

    // LLM side, per triple: per-stage duration and memory for each n_mb.
    std::vector<std::vector<double>> l_dur(l_combs.size());
    std::vector<std::vector<double>> l_mem(l_combs.size());
    for (std::size_t b = 0; b < l_combs.size(); ++b) {
      const ModuleParallel& l = l_combs[b];
      const LlmSlot& ls = llm_slots_[slot_of_[slot_index(l.tp, l.dp)]];
      const int mb = in_.gbs / l.dp;
      const double layers = static_cast<double>(ceil_div(in_.spec.l_layers, l.pp));
      const double model = prof.l_model_state({layers, double(l.tp)});
      l_dur[b].resize(mb);
      l_mem[b].resize(mb);
      for (int i = 0; i < mb; ++i) {
        l_dur[b][i] = ls.work[i] / l.pp;
        const double act = prof.l_act_state.blend_leading(
            std::span<const double>(ls.knots.data() + i * kl_, kl_), layers);
        l_mem[b][i] = model + static_cast<double>(l.pp) * act;
      }
    }

    std::vector<double> e_dur(max_mb), e_act(max_mb);
    for (const ModuleParallel& a : e_combs) {
      const EncoderSlot& es = enc_slots_[slot_of_[slot_index(a.tp, a.dp)]];
      const double layers = static_cast<double>(ceil_div(in_.spec.e_layers, a.pp));
      const double model = prof.e_model_state({layers, double(a.tp)});
      for (int i = 0; i < max_mb; ++i) {
        e_dur[i] = detail::per_stage(es.flops[i], es.thr[i], a.pp);
        e_act[i] = prof.e_act_state.blend_leading(
            std::span<const double>(es.knots.data() + i * ke_, ke_), layers);
      }
      for (std::size_t b = 0; b < l_combs.size(); ++b) {
        const ModuleParallel& l = l_combs[b];
        const double depth = static_cast<double>(a.pp + l.pp);
        const int mb = static_cast<int>(l_dur[b].size());
        const double* ld = l_dur[b].data();
        const double* lm = l_mem[b].data();
        for (int i = 0; i < mb; ++i) {
          const double em = model + depth * e_act[i];
          if (em > mem_cap || lm[i] > mem_cap) {
            out.tightest = std::min(out.tightest, std::max(em, lm[i]) / mem_cap);
            continue;
          }
          const double t = makespan(a.pp, l.pp, i + 1, e_dur[i], ld[i]);
          if (out.best.valid && t > out.best.objective) continue;
          out.best.offer(t, ParallelPlan{a, l, i + 1});
        }
      }
    }
  }

  const PlannerInputs& in_;
  const int n_;
  const int node_;
  const ShapePoint mean_;
  const ShapePoint guard_;
  const std::size_t ke_;
  const std::size_t kl_;
  std::vector<std::vector<ModuleParallel>> combs_;
  std::vector<EncoderSlot> enc_slots_;
  std::vector<LlmSlot> llm_slots_;
  std::vector<int> slot_of_;
};

Search monte_carlo_search(const PlannerInputs& in,
                          const PlannerOptions& options) {
  const std::vector<ModuleConfig> configs = enumerate_configs(in.cluster);
  const int count = static_cast<int>(configs.size());
  Search total;
#pragma omp parallel
  {
    Search local;
#pragma omp for schedule(dynamic, 1) nowait
    for (int c = 0; c < count; ++c) {
      const ModuleConfig& config = configs[c];
      const int max_mb = in.gbs / config.llm.dp;
      for (int n_mb = 1; n_mb <= max_mb; ++n_mb) {
        local.any_instance = true;
        const PlanEvaluation ev = evaluate_instance(config, n_mb, in, options);
        if (!ev.feasible) {
          local.tightest =
              std::min(local.tightest,
                       std::max(ev.e_mem, ev.l_mem) / in.cluster.mem_per_gpu);
          continue;
        }
        local.best.offer(ev.objective, ev.plan);
      }
    }
#pragma omp critical
    total.merge(local);
  }
  return total;
}

}  // namespace

PlanEvaluation optimize(const PlannerInputs& in,
                        const PlannerOptions& options) {
  detail::check_inputs(in);
  const Search found = options.objective == Objective::kMeanShape
                           ? MeanShapeKernel(in, options).run()
                           : monte_carlo_search(in, options);
  if (!found.best.valid) {
    detail::throw_infeasible(found.any_instance, found.tightest);
  }
  const ParallelPlan& p = found.best.plan;
  return evaluate_instance({p.enc, p.llm}, p.n_mb, in, options);
}

}  // namespace mmplan
