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

// JSON documents exchanged between the CLI subcommands. Doubles are written
// in shortest round-trip form, so write-then-read reproduces values exactly.

#include <istream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmplan/domain.hpp"
#include "mmplan/perf_model.hpp"
#include "mmplan/pipesim.hpp"
#include "mmplan/planner.hpp"
#include "mmplan/scheduler.hpp"
#include "mmplan/workload.hpp"

namespace mmplan {

using json = nlohmann::json;

inline constexpr int kDocumentVersion = 1;

json to_json(const ClusterSpec& cluster);
json to_json(const ModelSpec& spec);
json to_json(const ParallelPlan& plan);
json to_json(const PlanEvaluation& ev);
json to_json(const InterpGrid& grid);
json to_json(const ShapeDistribution& dist);
json to_json(const SimTrace& trace);

ClusterSpec cluster_from_json(const json& j);
ModelSpec model_from_json(const json& j);
ParallelPlan plan_from_json(const json& j);
PlanEvaluation evaluation_from_json(const json& j);
InterpGrid grid_from_json(const json& j);
ShapeDistribution distribution_from_json(const json& j);

// Throughput grids in a document are either per tensor-parallel group or
// per GPU; per-GPU grids are multiplied by their tp coordinate on load.
enum class ThroughputBasis { kPerGroup, kPerGpu };

struct ProfileDocument {
  PerfProfile profile;  // always per-group after loading
  ModelSpec spec;
  int gpus_per_node = 0;
};

json profile_to_json(const ProfileDocument& doc);
ProfileDocument profile_from_json(const json& j);

// Measurement table: one CSV row per grid point,
//   grid,coord_0[,coord_1[,coord_2]],value
// with grid in {e_thr, l_attn_thr, l_lin_thr, e_model_state, l_model_state,
// e_act_state, l_act_state}. Lines starting with '#' are comments. Axes are
// the sorted distinct coordinates; every combination must be present.
PerfProfile fit_profile_table(std::istream& table,
                              ThroughputBasis basis = ThroughputBasis::kPerGroup);

// One scheduled global batch. Buckets index into `items`; documents store
// item ids.
struct ScheduledBatch {
  std::size_t index = 0;
  std::vector<DataItem> items;
  Assignment assignment;
};

struct ScheduleDocument {
  ParallelPlan plan;
  int gbs = 0;
  std::vector<ScheduledBatch> batches;
};

json schedule_to_json(const ScheduleDocument& doc);
// Resolves bucket ids against the manifest. Throws InputError on unknown or
// duplicate ids.
ScheduleDocument schedule_from_json(const json& j,
                                    std::span<const DataItem> manifest);

// Contiguous slices of `gbs` items; a trailing partial slice is kept.
std::vector<std::vector<DataItem>> slice_batches(std::span<const DataItem> items,
                                                 int gbs);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& doc);

}  // namespace mmplan
