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

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>

namespace mmplan {

// Raised for malformed inputs (bad documents, invariant violations in
// caller-supplied values). The CLI maps it to the input-error exit code.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ClusterSpec {
  int n_gpus = 0;
  int gpus_per_node = 0;
  double mem_per_gpu = 0.0;  // bytes

  // Throws InputError unless n_gpus >= 2 and 1 <= gpus_per_node <= n_gpus.
  void check() const;
};

struct ModelSpec {
  int e_layers = 0;
  int l_layers = 0;
  int e_hidden = 0;
  int l_hidden = 0;
  int e_seq_len = 0;  // tokens per encoder instance, fixed for the model

  void check() const;
};

// (tp, pp, dp) degrees of one module.
struct ModuleParallel {
  int tp = 1;
  int pp = 1;
  int dp = 1;

  int gpus() const { return tp * pp * dp; }
  auto operator<=>(const ModuleParallel&) const = default;
};

// A complete 3D-parallel strategy for the encoder + LLM pipeline.
// Member order gives the lexicographic (e_tp, e_pp, e_dp, l_tp, l_pp, l_dp,
// n_mb) comparison used for tie-breaking.
struct ParallelPlan {
  ModuleParallel enc;
  ModuleParallel llm;
  int n_mb = 1;

  int pipeline_depth() const { return enc.pp + llm.pp; }
  // Number of microbatch buckets per global batch (n_mb * l_dp).
  int buckets() const { return n_mb * llm.dp; }

  auto operator<=>(const ParallelPlan&) const = default;
};

std::string to_string(const ParallelPlan& plan);

struct DataItem {
  std::string id;
  std::int64_t enc_batch = 0;    // encoder instances contributed by the item
  std::int64_t llm_seq_len = 1;  // packed text + visual tokens

  bool operator==(const DataItem&) const = default;
};

enum class PlanCheck {
  kOk,
  kNonPositiveDegree,
  kNoMicrobatches,
  kEncoderTpExceedsNode,
  kLlmTpExceedsNode,
  kGpuCountMismatch,
};

std::string_view describe(PlanCheck check);

// Structural validity of `plan` on `cluster`: positive degrees, n_mb >= 1,
// intra-node tensor parallelism and exact GPU usage. Returns the first
// violated constraint.
PlanCheck validate_plan(const ParallelPlan& plan, const ClusterSpec& cluster);

inline std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
  return (num + den - 1) / den;
}

}  // namespace mmplan
