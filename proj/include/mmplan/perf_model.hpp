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

#include <functional>

#include "mmplan/domain.hpp"
#include "mmplan/interp.hpp"

namespace mmplan {

// Profiled performance and memory models of both modules.
//
// Throughput grids hold the aggregate FLOP/s of one tensor-parallel group
// (all tp GPUs together). Profile documents may instead carry per-GPU
// throughput; those are scaled by the tp coordinate at load time.
// Memory grids hold bytes per GPU.
struct PerfProfile {
  InterpGrid e_thr;          // (enc_batch, e_tp)
  InterpGrid l_attn_thr;     // (llm_seq_len, l_tp)
  InterpGrid l_lin_thr;      // (llm_seq_len, l_tp)
  InterpGrid e_model_state;  // (layers, e_tp)
  InterpGrid l_model_state;  // (layers, l_tp)
  InterpGrid e_act_state;    // (layers, e_tp, enc_batch), at the model's e_seq_len
  InterpGrid l_act_state;    // (layers, l_tp, llm_seq_len)

  // Shape and positivity checks; with gpus_per_node > 0 also checks that
  // tp knots do not exceed it.
  void check(int gpus_per_node = 0) const;

  bool operator==(const PerfProfile&) const = default;
};

double encoder_throughput(const PerfProfile& profile, double enc_batch,
                          int e_tp);
double llm_attn_throughput(const PerfProfile& profile, double llm_seq_len,
                           int l_tp);
double llm_lin_throughput(const PerfProfile& profile, double llm_seq_len,
                          int l_tp);

// Seconds for one LLM pass: attention and linear work each divided by their
// own throughput model. Throws InputError on a zero throughput.
double llm_duration(const PerfProfile& profile, double attn_flops,
                    double lin_flops, double llm_seq_len, int l_tp);

int encoder_stage_layers(const ParallelPlan& plan, const ModelSpec& spec);
int llm_stage_layers(const ParallelPlan& plan, const ModelSpec& spec);

// Peak bytes per encoder GPU. Encoder activations stay live for the whole
// pipeline, hence the (e_pp + l_pp) multiplier.
double encoder_memory(const PerfProfile& profile, const ParallelPlan& plan,
                      const ModelSpec& spec, double enc_batch);
// Peak bytes per LLM GPU (packed sequence, batch fixed at 1).
double llm_memory(const PerfProfile& profile, const ParallelPlan& plan,
                  const ModelSpec& spec, double llm_seq_len);

// Cost functions used to fill synthetic grids. Each returns a value for one
// grid point; empty functions select the defaults derived from SynthParams.
struct SynthCost {
  std::function<double(double enc_batch, int tp)> e_thr;
  std::function<double(double seq, int tp)> l_attn_thr;
  std::function<double(double seq, int tp)> l_lin_thr;
  std::function<double(double layers, int tp)> e_model_state;
  std::function<double(double layers, int tp)> l_model_state;
  std::function<double(double layers, int tp, double enc_batch)> e_act_state;
  std::function<double(double layers, int tp, double seq)> l_act_state;
};

struct SynthParams {
  double peak_flops_per_gpu = 150e12;
  double tp_efficiency = 0.85;  // per doubling of tp
  double enc_batch_half = 8.0;  // batch reaching half of peak
  double llm_seq_half = 2048.0;
  double attn_efficiency = 0.55;  // attention peak relative to linear peak
  double bytes_per_param = 16.0;  // weights + grads + optimizer states
  double act_bytes_per_token_hidden = 34.0;
  int layer_knot_low = 1;
  int layer_knot_high = 2;
  int max_enc_batch = 16384;  // largest batch knot
  int max_llm_seq = 1 << 20;  // largest sequence knot
  SynthCost cost;
};

// Grids over tp in {1, 2, 4, ..., gpus_per_node}, two layer counts, and
// power-of-two batch / sequence knots, filled from the cost functions.
PerfProfile synth_profile(const ModelSpec& spec, const ClusterSpec& cluster,
                          const SynthParams& params = {});

// Powers of two up to and including n, followed by n itself when n is not
// a power of two.
std::vector<double> tp_knots(int gpus_per_node);

}  // namespace mmplan
