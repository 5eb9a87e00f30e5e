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

// Shared arithmetic of the serial reference and the OpenMP kernel. Both
// paths must evaluate identical expressions so their optima agree exactly.

#include "mmplan/planner.hpp"

namespace mmplan::detail {

inline double scaled_shape(double per_item, int gbs, int n_mb, int dp) {
  return per_item * static_cast<double>(gbs) /
         (static_cast<double>(n_mb) * static_cast<double>(dp));
}

struct EncoderWork {
  double flops;
  double thr;
};

inline EncoderWork encoder_work(const PerfProfile& profile,
                                const ModelSpec& spec, int tp, double t_bsz) {
  return {encoder_flops(t_bsz, spec), encoder_throughput(profile, t_bsz, tp)};
}

inline double per_stage(double flops, double thr, int pp) {
  return flops / (thr * static_cast<double>(pp));
}

// Whole-module LLM seconds for one microbatch (before the pp split).
inline double llm_work(const PerfProfile& profile, const ModelSpec& spec,
                       int tp, const MicrobatchShape& shape, double seq_sq) {
  return llm_duration(profile, llm_attn_flops(shape.instances * seq_sq, spec),
                      llm_lin_flops(shape.t_seq, spec), shape.t_seq, tp);
}

ShapePoint guard_point(const ShapeDistribution& dist,
                       const PlannerOptions& options);
void check_inputs(const PlannerInputs& in);
[[noreturn]] void throw_infeasible(bool any_instance, double tightest);

}  // namespace mmplan::detail
