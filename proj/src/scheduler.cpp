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

#include "mmplan/scheduler.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <numeric>
#include <queue>

namespace mmplan {
namespace {

using Clock = std::chrono::steady_clock;

void check_args(const ItemDurations& d, std::size_t m) {
  if (m == 0) throw InputError("bucket count must be >= 1");
  if (d.l_dur.size() != d.e_dur.size()) {
    throw InputError("duration vectors differ in length");
  }
}

std::vector<std::vector<std::size_t>> to_buckets(
    const std::vector<std::size_t>& bucket_of_item, std::size_t m) {
  std::vector<std::vector<std::size_t>> buckets(m);
  for (std::size_t i = 0; i < bucket_of_item.size(); ++i) {
    buckets[bucket_of_item[i]].push_back(i);
  }
  return buckets;
}

// Items in descending key order, ties by index.
std::vector<std::size_t> lpt_order(const ItemDurations& d) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d.key(a) > d.key(b);
  });
  return order;
}

class BranchAndBound {
 public:
  BranchAndBound(const ItemDurations& d, std::size_t m, const SolveBudget& budget)
      : m_(m), budget_(budget), order_(lpt_order(d)), n_(d.size()) {
    e_.resize(n_);
    l_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      e_[k] = d.e_dur[order_[k]];
      l_[k] = d.l_dur[order_[k]];
    }
    suffix_e_.assign(n_ + 1, 0.0);
    suffix_l_.assign(n_ + 1, 0.0);
    for (std::size_t k = n_; k-- > 0;) {
      suffix_e_[k] = std::max(suffix_e_[k + 1], e_[k]);
      suffix_l_[k] = std::max(suffix_l_[k + 1], l_[k]);
    }
    global_lb_ = c_max_lower_bound(d, m);
    load_e_.assign(m_, 0.0);
    load_l_.assign(m_, 0.0);
    current_.assign(n_, 0);
  }

  void seed(const Assignment& incumbent) {
    best_value_ = incumbent.c_max;
    best_.assign(n_, 0);
    std::vector<std::size_t> where(n_);
    for (std::size_t b = 0; b < incumbent.buckets.size(); ++b) {
      for (std::size_t i : incumbent.buckets[b]) where[i] = b;
    }
    for (std::size_t k = 0; k < n_; ++k) best_[k] = where[order_[k]];
  }

  // True when the search space was exhausted (incumbent proven optimal).
  bool run() {
    start_ = Clock::now();
    if (best_value_ <= global_lb_) return true;
    if (budget_.max_nodes && *budget_.max_nodes == 0) return false;
    dfs(0, 0, 0.0);
    return !aborted_;
  }

  std::vector<std::size_t> best_bucket_of_item() const {
    std::vector<std::size_t> out(n_);
    for (std::size_t k = 0; k < n_; ++k) out[order_[k]] = best_[k];
    return out;
  }
  std::uint64_t nodes() const { return nodes_; }

 private:
  bool out_of_budget() {
    if (budget_.max_nodes && nodes_ >= *budget_.max_nodes) return true;
    if (budget_.wall_limit && (nodes_ & 1023) == 0 &&
        Clock::now() - start_ >= *budget_.wall_limit) {
      return true;
    }
    return false;
  }

  void dfs(std::size_t k, std::size_t used, double c_max) {
    if (k == n_) {
      if (c_max < best_value_) {
        best_value_ = c_max;
        best_ = current_;
        if (best_value_ <= global_lb_) done_ = true;
      }
      return;
    }
    // Children: every used bucket plus the first unused one. Buckets with
    // identical loads lead to symmetric subtrees; only the first is kept.
    const std::size_t limit = std::min(used + 1, m_);
    struct Child {
      double c_max;
      std::size_t bucket;
    };
    Child children[64];
    std::vector<Child> overflow;
    Child* kids = children;
    if (limit > 64) {
      overflow.resize(limit);
      kids = overflow.data();
    }
    std::size_t count = 0;
    for (std::size_t j = 0; j < limit; ++j) {
      bool duplicate = false;
      for (std::size_t i = 0; i < j && !duplicate; ++i) {
        duplicate = load_e_[i] == load_e_[j] && load_l_[i] == load_l_[j];
      }
      if (duplicate) continue;
      const double child = std::max(
          c_max, std::max(load_e_[j] + e_[k], load_l_[j] + l_[k]));
      if (child >= best_value_) continue;
      kids[count++] = {child, j};
    }
    std::stable_sort(kids, kids + count, [](const Child& a, const Child& b) {
      return a.c_max < b.c_max;
    });
    for (std::size_t c = 0; c < count; ++c) {
      if (done_ || aborted_) return;
      if (out_of_budget()) {
        aborted_ = true;
        return;
      }
      ++nodes_;
      const std::size_t j = kids[c].bucket;
      if (kids[c].c_max >= best_value_) continue;
      load_e_[j] += e_[k];
      load_l_[j] += l_[k];
      current_[k] = j;
      if (lower_bound(k + 1, kids[c].c_max) < best_value_) {
        dfs(k + 1, std::max(used, j + 1), kids[c].c_max);
      }
      load_e_[j] -= e_[k];
      load_l_[j] -= l_[k];
    }
  }

  double lower_bound(std::size_t next, double c_max) const {
    double lb = std::max(c_max, global_lb_);
    if (next < n_) {
      const double min_e = *std::min_element(load_e_.begin(), load_e_.end());
      const double min_l = *std::min_element(load_l_.begin(), load_l_.end());
      lb = std::max(lb, std::max(min_e + suffix_e_[next], min_l + suffix_l_[next]));
    }
    return lb;
  }

  const std::size_t m_;
  const SolveBudget budget_;
  const std::vector<std::size_t> order_;
  const std::size_t n_;
  std::vector<double> e_, l_, suffix_e_, suffix_l_;
  std::vector<double> load_e_, load_l_;
  std::vector<std::size_t> current_, best_;
  double global_lb_ = 0.0;
  double best_value_ = std::numeric_limits<double>::infinity();
  std::uint64_t nodes_ = 0;
  bool done_ = false;
  bool aborted_ = false;
  Clock::time_point start_;
};

}  // namespace

std::string_view to_string(SolverKind solver) {
  return solver == SolverKind::kExact ? "exact" : "lpt";
}

std::string_view to_string(Optimality optimality) {
  return optimality == Optimality::kProven ? "proven" : "heuristic";
}

double bucket_c_max(const ItemDurations& durations,
                    const std::vector<std::vector<std::size_t>>& buckets) {
  double c_max = 0.0;
  for (const auto& bucket : buckets) {
    double e = 0.0;
    double l = 0.0;
    for (std::size_t i : bucket) {
      e += durations.e_dur.at(i);
      l += durations.l_dur.at(i);
    }
    c_max = std::max(c_max, std::max(e, l));
  }
  return c_max;
}

double c_max_lower_bound(const ItemDurations& durations, std::size_t m) {
  check_args(durations, m);
  double total_e = 0.0;
  double total_l = 0.0;
  double largest = 0.0;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    total_e += durations.e_dur[i];
    total_l += durations.l_dur[i];
    largest = std::max(largest, durations.key(i));
  }
  const double md = static_cast<double>(m);
  return std::max({total_e / md, total_l / md, largest});
}

ItemDurations compute_item_durations(std::span<const DataItem> items,
                                     const ParallelPlan& plan,
                                     const PerfProfile& profile,
                                     const ModelSpec& spec,
                                     const CorrectionTracker* tracker) {
  const double share =
      static_cast<double>(plan.llm.dp) / static_cast<double>(plan.enc.dp);
  ItemDurations out;
  out.e_dur.reserve(items.size());
  out.l_dur.reserve(items.size());
  for (const DataItem& d : items) {
    const FlopLoad f = item_flops(d, spec);
    const double seq = static_cast<double>(d.llm_seq_len);
    double e = f.e_flops == 0.0
                   ? 0.0
                   : share * f.e_flops /
                         (encoder_throughput(profile, double(d.enc_batch),
                                             plan.enc.tp) *
                          plan.enc.pp);
    double l = llm_duration(profile, f.l_attn_flops, f.l_lin_flops, seq,
                            plan.llm.tp) /
               plan.llm.pp;
    if (tracker != nullptr) {
      if (auto k = tracker->duration_factor(tracker->key_for(Module::kEncoder, d))) {
        e *= *k;
      }
      if (auto k = tracker->duration_factor(tracker->key_for(Module::kLlm, d))) {
        l *= *k;
      }
    }
    out.push_back(e, l);
  }
  return out;
}

Assignment solve_lpt(const ItemDurations& durations, std::size_t m) {
  check_args(durations, m);
  using Entry = std::pair<double, std::size_t>;  // (max-stage load, bucket)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t j = 0; j < m; ++j) heap.push({0.0, j});
  std::vector<double> load_e(m, 0.0);
  std::vector<double> load_l(m, 0.0);
  std::vector<std::size_t> bucket_of(durations.size());
  for (std::size_t i : lpt_order(durations)) {
    const std::size_t j = heap.top().second;
    heap.pop();
    load_e[j] += durations.e_dur[i];
    load_l[j] += durations.l_dur[i];
    bucket_of[i] = j;
    heap.push({std::max(load_e[j], load_l[j]), j});
  }
  Assignment a;
  a.buckets = to_buckets(bucket_of, m);
  a.c_max = bucket_c_max(durations, a.buckets);
  a.solver = SolverKind::kLpt;
  a.optimality = Optimality::kHeuristic;
  return a;
}

ExactResult solve_exact(const ItemDurations& durations, std::size_t m,
                        const SolveBudget& budget) {
  check_args(durations, m);
  ExactResult result;
  if (durations.size() == 0) {
    result.assignment.buckets.assign(m, {});
    result.assignment.solver = SolverKind::kExact;
    result.assignment.optimality = Optimality::kProven;
    result.completed = true;
    return result;
  }
  const Assignment lpt = solve_lpt(durations, m);
  BranchAndBound bnb(durations, m, budget);
  bnb.seed(lpt);
  result.completed = bnb.run();
  result.nodes = bnb.nodes();
  result.assignment.buckets = to_buckets(bnb.best_bucket_of_item(), m);
  result.assignment.c_max = bucket_c_max(durations, result.assignment.buckets);
  result.assignment.solver = SolverKind::kExact;
  result.assignment.optimality =
      result.completed ? Optimality::kProven : Optimality::kHeuristic;
  return result;
}

Assignment schedule_durations(const ItemDurations& durations, std::size_t m,
                              const SolveBudget& budget) {
  const bool skip_exact =
      (budget.max_nodes && *budget.max_nodes == 0) ||
      (budget.wall_limit && budget.wall_limit->count() <= 0);
  if (skip_exact) return solve_lpt(durations, m);
  ExactResult exact = solve_exact(durations, m, budget);
  if (exact.completed) return std::move(exact.assignment);
  Assignment lpt = solve_lpt(durations, m);
  if (exact.assignment.c_max < lpt.c_max) return std::move(exact.assignment);
  return lpt;
}

Assignment schedule_batch(std::span<const DataItem> batch,
                          const ParallelPlan& plan, const PerfProfile& profile,
                          const ModelSpec& spec,
                          const CorrectionTracker* tracker,
                          const SolveBudget& budget) {
  const ItemDurations d =
      compute_item_durations(batch, plan, profile, spec, tracker);
  return schedule_durations(d, static_cast<std::size_t>(plan.buckets()), budget);
}

void schedule_stream(
    std::span<const std::vector<DataItem>> batches, const ParallelPlan& plan,
    const PerfProfile& profile, const ModelSpec& spec,
    const CorrectionTracker* tracker, const SolveBudget& budget,
    const std::function<void(std::size_t, const Assignment&)>& consume) {
  auto launch = [&](std::size_t t) {
    std::optional<CorrectionTracker> snapshot;
    if (tracker != nullptr) snapshot = *tracker;
    return std::async(std::launch::async,
                      [&, t, snapshot = std::move(snapshot)]() {
                        return schedule_batch(
                            batches[t], plan, profile, spec,
                            snapshot ? &*snapshot : nullptr, budget);
                      });
  };
  if (batches.empty()) return;
  std::future<Assignment> next = launch(0);
  for (std::size_t t = 0; t < batches.size(); ++t) {
    Assignment current = next.get();
    if (t + 1 < batches.size()) next = launch(t + 1);
    consume(t, current);
  }
}

}  // namespace mmplan
