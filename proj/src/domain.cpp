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

#include "mmplan/domain.hpp"

#include <sstream>

namespace mmplan {

void ClusterSpec::check() const {
  if (n_gpus < 2) throw InputError("cluster needs at least 2 GPUs");
  if (gpus_per_node < 1) throw InputError("gpus_per_node must be >= 1");
  if (gpus_per_node > n_gpus) {
    throw InputError("gpus_per_node exceeds the GPU count");
  }
  if (!(mem_per_gpu > 0.0)) throw InputError("mem_per_gpu must be positive");
}

void ModelSpec::check() const {
  if (e_layers < 1 || l_layers < 1 || e_hidden < 1 || l_hidden < 1 ||
      e_seq_len < 1) {
    throw InputError("model spec fields must all be >= 1");
  }
}

std::string to_string(const ParallelPlan& plan) {
  std::ostringstream os;
  os << "(" << plan.enc.tp << "," << plan.enc.pp << "," << plan.enc.dp << ", "
     << plan.llm.tp << "," << plan.llm.pp << "," << plan.llm.dp << ", "
     << plan.n_mb << ")";
  return os.str();
}

std::string_view describe(PlanCheck check) {
  switch (check) {
    case PlanCheck::kOk:
      return "ok";
    case PlanCheck::kNonPositiveDegree:
      return "parallel degrees must be positive";
    case PlanCheck::kNoMicrobatches:
      return "n_mb must be >= 1";
    case PlanCheck::kEncoderTpExceedsNode:
      return "encoder tensor parallelism exceeds GPUs per node";
    case PlanCheck::kLlmTpExceedsNode:
      return "LLM tensor parallelism exceeds GPUs per node";
    case PlanCheck::kGpuCountMismatch:
      return "encoder + LLM GPUs do not equal the cluster size";
  }
  return "unknown";
}

PlanCheck validate_plan(const ParallelPlan& plan, const ClusterSpec& cluster) {
  for (const ModuleParallel* m : {&plan.enc, &plan.llm}) {
    if (m->tp < 1 || m->pp < 1 || m->dp < 1) {
      return PlanCheck::kNonPositiveDegree;
    }
  }
  if (plan.n_mb < 1) return PlanCheck::kNoMicrobatches;
  if (plan.enc.tp > cluster.gpus_per_node) {
    return PlanCheck::kEncoderTpExceedsNode;
  }
  if (plan.llm.tp > cluster.gpus_per_node) return PlanCheck::kLlmTpExceedsNode;
  if (plan.enc.gpus() + plan.llm.gpus() != cluster.n_gpus) {
    return PlanCheck::kGpuCountMismatch;
  }
  return PlanCheck::kOk;
}

}  // namespace mmplan
