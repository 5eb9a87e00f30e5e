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

// mmplan: profile fitting, dataset analysis, parallelism planning, batch
// scheduling and pipeline simulation.
//
// Exit status: 0 on success, 2 for input errors, 3 when no configuration
// fits in memory.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "mmplan/documents.hpp"
#include "mmplan/perf_model.hpp"
#include "mmplan/pipesim.hpp"
#include "mmplan/planner.hpp"
#include "mmplan/scheduler.hpp"
#include "mmplan/workload.hpp"

namespace {

using namespace mmplan;

constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;

struct CommonFlags {
  std::uint64_t seed = 0;
  std::string out = "-";
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", f.out, "Output document path ('-' for stdout)")
      ->capture_default_str();
  cmd->add_flag("--verbose", f.verbose, "Write extended output");
}

std::vector<DataItem> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest '" + path + "'");
  return ingest_manifest(in);
}

Bucketing parse_bucketing(const std::string& text) {
  if (text == "pow2") return Bucketing::pow2();
  try {
    std::size_t used = 0;
    const long long width = std::stoll(text, &used);
    if (used == text.size()) return Bucketing::fixed(width);
  } catch (const std::exception&) {
  }
  throw InputError("bucketing must be 'pow2' or a positive width, got '" + text + "'");
}

// --- fit -------------------------------------------------------------------

struct FitFlags {
  std::string mode = "synth";
  std::string table;
  std::string basis = "per_group";
  int gpus_per_node = 8;
  ModelSpec spec{27, 32, 1152, 4096, 729};
  double peak_tflops = 150.0;
};

void add_model_flags(CLI::App* cmd, ModelSpec& spec) {
  cmd->add_option("--e-layers", spec.e_layers, "Encoder layers")->capture_default_str();
  cmd->add_option("--l-layers", spec.l_layers, "LLM layers")->capture_default_str();
  cmd->add_option("--e-hidden", spec.e_hidden, "Encoder hidden size")->capture_default_str();
  cmd->add_option("--l-hidden", spec.l_hidden, "LLM hidden size")->capture_default_str();
  cmd->add_option("--e-seq-len", spec.e_seq_len, "Tokens per encoder instance")
      ->capture_default_str();
}

int run_fit(const FitFlags& f, const CommonFlags& c) {
  f.spec.check();
  ProfileDocument doc;
  doc.spec = f.spec;
  doc.gpus_per_node = f.gpus_per_node;
  if (f.mode == "synth") {
    SynthParams params;
    params.peak_flops_per_gpu = f.peak_tflops * 1e12;
    ClusterSpec cluster{std::max(2, f.gpus_per_node), f.gpus_per_node, 1.0};
    doc.profile = synth_profile(f.spec, cluster, params);
  } else {
    if (f.table.empty()) throw InputError("fit --mode table needs --table");
    std::ifstream in(f.table);
    if (!in) throw InputError("cannot open table '" + f.table + "'");
    doc.profile = fit_profile_table(
        in, f.basis == "per_gpu" ? ThroughputBasis::kPerGpu : ThroughputBasis::kPerGroup);
    doc.profile.check(f.gpus_per_node);
  }
  write_json_file(c.out, profile_to_json(doc));
  return 0;
}

// --- analyze ---------------------------------------------------------------

struct AnalyzeFlags {
  std::string manifest;
  std::size_t sample_size = 10000;
  std::string enc_bucket = "pow2";
  std::string seq_bucket = "pow2";
};

int run_analyze(const AnalyzeFlags& f, const CommonFlags& c) {
  const std::vector<DataItem> items = read_manifest(f.manifest);
  if (items.empty()) throw InputError("manifest '" + f.manifest + "' is empty");
  const std::vector<DataItem> sample = sample_dataset(items, f.sample_size, c.seed);
  const ShapeDistribution dist = build_distribution(
      sample, parse_bucketing(f.enc_bucket), parse_bucketing(f.seq_bucket));
  json doc = to_json(dist);
  doc["seed"] = c.seed;
  doc["dataset_size"] = items.size();
  write_json_file(c.out, doc);
  return 0;
}

// --- plan ------------------------------------------------------------------

struct PlanFlags {
  std::string profile;
  std::string dist;
  int gpus = 8;
  int gpus_per_node = 0;
  double mem_gib = 80.0;
  double mem_bytes = 0.0;
  int gbs = 0;
  std::string objective = "mean";
  std::string mem_guard = "mean";
  std::size_t top = 0;
};

int run_plan(const PlanFlags& f, const CommonFlags& c) {
  const ProfileDocument prof = profile_from_json(read_json_file(f.profile));
  const ShapeDistribution dist = distribution_from_json(read_json_file(f.dist));
  ClusterSpec cluster{f.gpus, f.gpus_per_node > 0 ? f.gpus_per_node : prof.gpus_per_node,
                      f.mem_bytes > 0.0 ? f.mem_bytes : f.mem_gib * double(1ull << 30)};
  cluster.check();
  PlannerOptions options;
  options.objective = f.objective == "mc" ? Objective::kMonteCarlo : Objective::kMeanShape;
  options.mem_guard = f.mem_guard == "p99" ? MemGuard::kQuantile : MemGuard::kMean;
  const PlannerInputs in{cluster, prof.profile, dist, prof.spec, f.gbs};

  const PlanEvaluation best = optimize(in, options);
  json doc = {{"kind", "plan"},
              {"version", kDocumentVersion},
              {"cluster", to_json(cluster)},
              {"model", to_json(prof.spec)},
              {"gbs", f.gbs},
              {"objective", f.objective},
              {"mem_guard", f.mem_guard},
              {"plan", to_json(best.plan)},
              {"evaluation", to_json(best)}};
  if (c.verbose) {
    std::vector<PlanEvaluation> ranked = rank_feasible(in, options);
    if (f.top > 0 && ranked.size() > f.top) ranked.resize(f.top);
    json list = json::array();
    for (const PlanEvaluation& ev : ranked) list.push_back(to_json(ev));
    doc["ranked"] = list;
  }
  write_json_file(c.out, doc);
  return 0;
}

// --- schedule --------------------------------------------------------------

struct ScheduleFlags {
  std::string plan;
  std::string profile;
  std::string manifest;
  int gbs = 0;
  std::uint64_t node_budget = 200000;
  long time_limit_ms = -1;
  bool shuffle = false;
};

struct PlanDocument {
  ParallelPlan plan;
  int gbs;
};

PlanDocument read_plan(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.contains("plan") || !j.contains("gbs")) {
    throw InputError("'" + path + "' is not a plan document");
  }
  return {plan_from_json(j.at("plan")), j.at("gbs").get<int>()};
}

int run_schedule(const ScheduleFlags& f, const CommonFlags& c) {
  const PlanDocument pd = read_plan(f.plan);
  const ProfileDocument prof = profile_from_json(read_json_file(f.profile));
  std::vector<DataItem> items = read_manifest(f.manifest);
  const int gbs = f.gbs != 0 ? f.gbs : pd.gbs;
  if (gbs < 1) throw InputError("global batch size must be >= 1");
  if (f.shuffle) {
    std::mt19937_64 rng(c.seed);
    std::shuffle(items.begin(), items.end(), rng);
  }
  SolveBudget budget = SolveBudget::nodes(f.node_budget);
  if (f.time_limit_ms >= 0) budget.wall_limit = std::chrono::milliseconds(f.time_limit_ms);

  const auto batches = slice_batches(items, gbs);
  ScheduleDocument doc{pd.plan, gbs, {}};
  schedule_stream(batches, pd.plan, prof.profile, prof.spec, nullptr, budget,
                  [&](std::size_t t, const Assignment& a) {
                    doc.batches.push_back({t, batches[t], a});
                  });
  write_json_file(c.out, schedule_to_json(doc));
  return 0;
}

// --- simulate --------------------------------------------------------------

struct SimulateFlags {
  std::string plan;
  std::string profile;
  std::string manifest;
  std::string schedule;
  std::string baseline;
  double backward_ratio = 2.0;
  int gbs = 0;
};

json summary_of(const ScheduleSimulation& sim) {
  return {{"makespan", sim.makespan},
          {"busy", sim.busy},
          {"idle", sim.idle},
          {"idle_fraction", sim.idle_fraction}};
}

int run_simulate(const SimulateFlags& f, const CommonFlags& c) {
  if (f.schedule.empty() && f.baseline.empty()) {
    throw InputError("simulate needs --schedule or --baseline random");
  }
  const PlanDocument pd = read_plan(f.plan);
  const ProfileDocument prof = profile_from_json(read_json_file(f.profile));
  const std::vector<DataItem> items = read_manifest(f.manifest);
  const SimOptions options{f.backward_ratio, 0.0};
  const auto m = static_cast<std::size_t>(pd.plan.buckets());

  std::vector<ScheduledBatch> batches;
  if (!f.schedule.empty()) {
    ScheduleDocument sd = schedule_from_json(read_json_file(f.schedule), items);
    if (sd.plan != pd.plan) {
      throw InputError("schedule was built for plan " + to_string(sd.plan) +
                       ", plan document holds " + to_string(pd.plan));
    }
    for (const ScheduledBatch& b : sd.batches) {
      if (b.assignment.buckets.size() != m) {
        throw InputError("schedule batch " + std::to_string(b.index) + " has " +
                         std::to_string(b.assignment.buckets.size()) +
                         " buckets, plan needs " + std::to_string(m));
      }
    }
    batches = std::move(sd.batches);
  } else {
    const int gbs = f.gbs != 0 ? f.gbs : pd.gbs;
    const auto sliced = slice_batches(items, gbs);
    for (std::size_t t = 0; t < sliced.size(); ++t) batches.push_back({t, sliced[t], {}});
  }

  json per_batch = json::array();
  json traces = json::array();
  double sched_idle = 0.0, sched_busy = 0.0, sched_span = 0.0;
  double base_idle = 0.0, base_busy = 0.0, base_span = 0.0;
  for (std::size_t t = 0; t < batches.size(); ++t) {
    const ScheduledBatch& b = batches[t];
    const ItemDurations d = compute_item_durations(b.items, pd.plan, prof.profile, prof.spec);
    json entry = {{"index", b.index}, {"items", b.items.size()}};
    const ScheduleSimulation* traced = nullptr;
    std::optional<ScheduleSimulation> sched, base;
    if (!f.schedule.empty()) {
      sched = evaluate_schedule(pd.plan, b.assignment, d, options);
      entry["scheduled"] = summary_of(*sched);
      sched_idle += sched->idle;
      sched_busy += sched->busy;
      sched_span += sched->makespan;
      traced = &*sched;
    }
    if (f.baseline == "random") {
      const Assignment r = random_partition(b.items.size(), m, c.seed + t, &d);
      base = evaluate_schedule(pd.plan, r, d, options);
      entry["random"] = summary_of(*base);
      base_idle += base->idle;
      base_busy += base->busy;
      base_span += base->makespan;
      if (traced == nullptr) traced = &*base;
    }
    per_batch.push_back(entry);
    json replicas = json::array();
    for (std::size_t r = 0; r < traced->replicas.size(); ++r) {
      json tr = to_json(traced->replicas[r]);
      tr["replica"] = r;
      replicas.push_back(tr);
    }
    traces.push_back({{"index", b.index}, {"replicas", replicas}});
  }

  json summary = {{"batches", batches.size()},
                  {"backward_ratio", f.backward_ratio},
                  {"ideal_bubble_fraction",
                   ideal_bubble_fraction(pd.plan.pipeline_depth(), pd.plan.n_mb)}};
  if (!f.schedule.empty()) {
    summary["scheduled"] = {{"makespan", sched_span}, {"busy", sched_busy},
                            {"idle", sched_idle},
                            {"idle_fraction", sched_busy > 0 ? sched_idle / sched_busy : 0.0}};
  }
  if (f.baseline == "random") {
    summary["random"] = {{"makespan", base_span}, {"busy", base_busy},
                         {"idle", base_idle},
                         {"idle_fraction", base_busy > 0 ? base_idle / base_busy : 0.0}};
  }
  json doc = {{"kind", "simulation"},
              {"version", kDocumentVersion},
              {"plan", to_json(pd.plan)},
              {"summary", summary},
              {"per_batch", per_batch},
              {"traces", traces}};
  write_json_file(c.out, doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal pipeline planner, scheduler and simulator"};
  app.require_subcommand(1);

  CommonFlags fit_c, analyze_c, plan_c, sched_c, sim_c;

  FitFlags fit_f;
  auto* fit = app.add_subcommand("fit", "Write a performance profile document");
  add_common(fit, fit_c);
  fit->add_option("--mode", fit_f.mode, "synth or table")
      ->check(CLI::IsMember({"synth", "table"}))
      ->capture_default_str();
  fit->add_option("--table", fit_f.table, "Measurement table (CSV)");
  fit->add_option("--basis", fit_f.basis, "Throughput basis of the table")
      ->check(CLI::IsMember({"per_group", "per_gpu"}))
      ->capture_default_str();
  fit->add_option("--gpus-per-node", fit_f.gpus_per_node, "GPUs per node")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit->add_option("--peak-tflops", fit_f.peak_tflops, "Synthetic per-GPU peak")
      ->capture_default_str();
  add_model_flags(fit, fit_f.spec);

  AnalyzeFlags analyze_f;
  auto* analyze = app.add_subcommand("analyze", "Sample a manifest into a shape distribution");
  add_common(analyze, analyze_c);
  analyze->add_option("--manifest", analyze_f.manifest, "JSONL manifest")->required();
  analyze->add_option("--sample-size", analyze_f.sample_size, "Items to sample")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  analyze->add_option("--enc-bucket", analyze_f.enc_bucket, "pow2 or bucket width")
      ->capture_default_str();
  analyze->add_option("--seq-bucket", analyze_f.seq_bucket, "pow2 or bucket width")
      ->capture_default_str();

  PlanFlags plan_f;
  auto* plan = app.add_subcommand("plan", "Search the 3D-parallel configuration");
  add_common(plan, plan_c);
  plan->add_option("--profile", plan_f.profile, "Profile document")->required();
  plan->add_option("--dist", plan_f.dist, "Distribution document")->required();
  plan->add_option("--gpus", plan_f.gpus, "Cluster GPU count")->capture_default_str();
  plan->add_option("--gpus-per-node", plan_f.gpus_per_node,
                   "GPUs per node (default: from the profile)");
  plan->add_option("--mem-gib", plan_f.mem_gib, "Per-GPU memory in GiB")->capture_default_str();
  plan->add_option("--mem-bytes", plan_f.mem_bytes, "Per-GPU memory in bytes (overrides --mem-gib)");
  plan->add_option("--gbs", plan_f.gbs, "Global batch size")->required()->check(CLI::PositiveNumber);
  plan->add_option("--objective", plan_f.objective, "mean or mc")
      ->check(CLI::IsMember({"mean", "mc"}))
      ->capture_default_str();
  plan->add_option("--mem-guard", plan_f.mem_guard, "mean or p99")
      ->check(CLI::IsMember({"mean", "p99"}))
      ->capture_default_str();
  plan->add_option("--top", plan_f.top, "Limit the verbose ranked list (0 = all)");

  ScheduleFlags sched_f;
  auto* schedule = app.add_subcommand("schedule", "Partition global batches into microbatches");
  add_common(schedule, sched_c);
  schedule->add_option("--plan", sched_f.plan, "Plan document")->required();
  schedule->add_option("--profile", sched_f.profile, "Profile document")->required();
  schedule->add_option("--manifest", sched_f.manifest, "JSONL manifest")->required();
  schedule->add_option("--gbs", sched_f.gbs, "Global batch size (default: from the plan)");
  schedule->add_option("--node-budget", sched_f.node_budget, "Exact solver node budget")
      ->capture_default_str();
  schedule->add_option("--time-limit-ms", sched_f.time_limit_ms, "Exact solver wall-clock cap");
  schedule->add_flag("--shuffle", sched_f.shuffle, "Shuffle the manifest with --seed first");

  SimulateFlags sim_f;
  auto* simulate = app.add_subcommand("simulate", "Simulate 1F1B execution of scheduled batches");
  add_common(simulate, sim_c);
  simulate->add_option("--plan", sim_f.plan, "Plan document")->required();
  simulate->add_option("--profile", sim_f.profile, "Profile document")->required();
  simulate->add_option("--manifest", sim_f.manifest, "JSONL manifest")->required();
  simulate->add_option("--schedule", sim_f.schedule, "Schedule document");
  simulate->add_option("--baseline", sim_f.baseline, "Baseline partitioning to compare")
      ->check(CLI::IsMember({"random"}));
  simulate->add_option("--backward-ratio", sim_f.backward_ratio, "Backward / forward duration")
      ->capture_default_str();
  simulate->add_option("--gbs", sim_f.gbs, "Global batch size for baseline-only runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*fit) return run_fit(fit_f, fit_c);
    if (*analyze) return run_analyze(analyze_f, analyze_c);
    if (*plan) return run_plan(plan_f, plan_c);
    if (*schedule) return run_schedule(sched_f, sched_c);
    if (*simulate) return run_simulate(sim_f, sim_c);
  } catch (const NoFeasiblePlan& e) {
    std::cerr << "mmplan: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const InputError& e) {
    std::cerr << "mmplan: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "mmplan: malformed document: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "mmplan: internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitInput;
}
