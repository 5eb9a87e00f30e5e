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

#include "mmplan/perf_model.hpp"

#include <cmath>
#include <string>

namespace mmplan {
namespace {

void check_tp_axis(const InterpGrid& grid, std::size_t axis,
                   int gpus_per_node, const char* name) {
  if (gpus_per_node <= 0) return;
  if (grid.axes().at(axis).coords.back() > gpus_per_node) {
    throw InputError(std::string(name) +
                     ": tp knots exceed the GPUs per node");
  }
}

void check_positive(const InterpGrid& grid, const char* name) {
  for (double v : grid.values()) {
    if (!(v > 0.0)) {
      throw InputError(std::string(name) + ": throughput must be positive");
    }
  }
}

void check_rank(const InterpGrid& grid, std::size_t rank, const char* name) {
  if (grid.rank() != rank) {
    throw InputError(std::string(name) + ": expected rank " +
                     std::to_string(rank));
  }
}

std::vector<double> pow2_knots(double first, double last) {
  std::vector<double> knots;
  for (double v = first; v <= last; v *= 2.0) knots.push_back(v);
  if (knots.back() < last) knots.push_back(last);
  return knots;
}

double thr_shape(double peak, double eff, double x, double half, int tp) {
  return peak * tp * std::pow(eff, std::log2(static_cast<double>(tp))) * x /
         (x + half);
}

}  // namespace

void PerfProfile::check(int gpus_per_node) const {
  check_rank(e_thr, 2, "e_thr");
  check_rank(l_attn_thr, 2, "l_attn_thr");
  check_rank(l_lin_thr, 2, "l_lin_thr");
  check_rank(e_model_state, 2, "e_model_state");
  check_rank(l_model_state, 2, "l_model_state");
  check_rank(e_act_state, 3, "e_act_state");
  check_rank(l_act_state, 3, "l_act_state");
  check_positive(e_thr, "e_thr");
  check_positive(l_attn_thr, "l_attn_thr");
  check_positive(l_lin_thr, "l_lin_thr");
  check_tp_axis(e_thr, 1, gpus_per_node, "e_thr");
  check_tp_axis(l_attn_thr, 1, gpus_per_node, "l_attn_thr");
  check_tp_axis(l_lin_thr, 1, gpus_per_node, "l_lin_thr");
  check_tp_axis(e_model_state, 1, gpus_per_node, "e_model_state");
  check_tp_axis(l_model_state, 1, gpus_per_node, "l_model_state");
  check_tp_axis(e_act_state, 1, gpus_per_node, "e_act_state");
  check_tp_axis(l_act_state, 1, gpus_per_node, "l_act_state");
}

double encoder_throughput(const PerfProfile& profile, double enc_batch,
                          int e_tp) {
  return profile.e_thr({enc_batch, static_cast<double>(e_tp)});
}

double llm_attn_throughput(const PerfProfile& profile, double llm_seq_len,
                           int l_tp) {
  return profile.l_attn_thr({llm_seq_len, static_cast<double>(l_tp)});
}

double llm_lin_throughput(const PerfProfile& profile, double llm_seq_len,
                          int l_tp) {
  return profile.l_lin_thr({llm_seq_len, static_cast<double>(l_tp)});
}

double llm_duration(const PerfProfile& profile, double attn_flops,
                    double lin_flops, double llm_seq_len, int l_tp) {
  const double attn_thr = llm_attn_throughput(profile, llm_seq_len, l_tp);
  const double lin_thr = llm_lin_throughput(profile, llm_seq_len, l_tp);
  if (!(attn_thr > 0.0) || !(lin_thr > 0.0)) {
    throw InputError("zero LLM throughput at seq_len " +
                     std::to_string(llm_seq_len));
  }
  return attn_flops / attn_thr + lin_flops / lin_thr;
}

int encoder_stage_layers(const ParallelPlan& plan, const ModelSpec& spec) {
  return static_cast<int>(ceil_div(spec.e_layers, plan.enc.pp));
}

int llm_stage_layers(const ParallelPlan& plan, const ModelSpec& spec) {
  return static_cast<int>(ceil_div(spec.l_layers, plan.llm.pp));
}

double encoder_memory(const PerfProfile& profile, const ParallelPlan& plan,
                      const ModelSpec& spec, double enc_batch) {
  const double layers = encoder_stage_layers(plan, spec);
  const double tp = plan.enc.tp;
  const double model = profile.e_model_state({layers, tp});
  const double act = profile.e_act_state({layers, tp, enc_batch});
  return model + static_cast<double>(plan.enc.pp + plan.llm.pp) * act;
}

double llm_memory(const PerfProfile& profile, const ParallelPlan& plan,
                  const ModelSpec& spec, double llm_seq_len) {
  const double layers = llm_stage_layers(plan, spec);
  const double tp = plan.llm.tp;
  const double model = profile.l_model_state({layers, tp});
  const double act = profile.l_act_state({layers, tp, llm_seq_len});
  return model + static_cast<double>(plan.llm.pp) * act;
}

std::vector<double> tp_knots(int gpus_per_node) {
  return pow2_knots(1.0, static_cast<double>(gpus_per_node));
}

PerfProfile synth_profile(const ModelSpec& spec, const ClusterSpec& cluster,
                          const SynthParams& params) {
  spec.check();
  if (cluster.gpus_per_node < 1) throw InputError("gpus_per_node must be >= 1");
  if (!(params.peak_flops_per_gpu > 0.0) || !(params.tp_efficiency > 0.0) ||
      !(params.enc_batch_half > 0.0) || !(params.llm_seq_half > 0.0) ||
      !(params.attn_efficiency > 0.0) || !(params.bytes_per_param > 0.0) ||
      !(params.act_bytes_per_token_hidden > 0.0) ||
      params.layer_knot_low < 1 ||
      params.layer_knot_high <= params.layer_knot_low ||
      params.max_enc_batch < 1 || params.max_llm_seq < 2) {
    throw InputError("synthetic generator parameters must be positive");
  }

  SynthCost cost = params.cost;
  const double peak = params.peak_flops_per_gpu;
  const double eff = params.tp_efficiency;
  if (!cost.e_thr) {
    cost.e_thr = [=](double b, int tp) {
      return thr_shape(peak, eff, b, params.enc_batch_half, tp);
    };
  }
  if (!cost.l_lin_thr) {
    cost.l_lin_thr = [=](double s, int tp) {
      return thr_shape(peak, eff, s, params.llm_seq_half, tp);
    };
  }
  if (!cost.l_attn_thr) {
    cost.l_attn_thr = [=](double s, int tp) {
      return params.attn_efficiency *
             thr_shape(peak, eff, s, params.llm_seq_half, tp);
    };
  }
  const double e_h = spec.e_hidden;
  const double l_h = spec.l_hidden;
  if (!cost.e_model_state) {
    cost.e_model_state = [=](double layers, int tp) {
      return layers * 12.0 * e_h * e_h * params.bytes_per_param / tp;
    };
  }
  if (!cost.l_model_state) {
    cost.l_model_state = [=](double layers, int tp) {
      return layers * 12.0 * l_h * l_h * params.bytes_per_param / tp;
    };
  }
  const double e_seq = spec.e_seq_len;
  if (!cost.e_act_state) {
    cost.e_act_state = [=](double layers, int tp, double b) {
      return layers * b * e_seq * params.act_bytes_per_token_hidden * e_h / tp;
    };
  }
  if (!cost.l_act_state) {
    cost.l_act_state = [=](double layers, int tp, double s) {
      return layers * s * params.act_bytes_per_token_hidden * l_h / tp;
    };
  }

  const std::vector<double> tps = tp_knots(cluster.gpus_per_node);
  const std::vector<double> layers = {double(params.layer_knot_low),
                                      double(params.layer_knot_high)};
  const std::vector<double> batches =
      pow2_knots(1.0, static_cast<double>(params.max_enc_batch));
  const std::vector<double> seqs =
      pow2_knots(1.0, static_cast<double>(params.max_llm_seq));
  std::vector<double> batches0 = batches;
  batches0.insert(batches0.begin(), 0.0);
  std::vector<double> seqs0 = seqs;
  seqs0.insert(seqs0.begin(), 0.0);

  auto tp_axis = [&](const char* name) {
    return GridAxis{name, tps, OutOfRange::kClamp};
  };
  const GridAxis layer_axis{"layers", layers, OutOfRange::kLinear};

  auto fill2 = [](const std::vector<double>& xs, const std::vector<double>& ys,
                  auto&& f) {
    std::vector<double> v;
    v.reserve(xs.size() * ys.size());
    for (double x : xs)
      for (double y : ys) v.push_back(f(x, y));
    return v;
  };
  auto fill3 = [](const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::vector<double>& zs, auto&& f) {
    std::vector<double> v;
    v.reserve(xs.size() * ys.size() * zs.size());
    for (double x : xs)
      for (double y : ys)
        for (double z : zs) v.push_back(f(x, y, z));
    return v;
  };
  auto as_int = [](double tp) { return static_cast<int>(tp); };

  PerfProfile p;
  p.e_thr = InterpGrid(
      {GridAxis{"enc_batch", batches, OutOfRange::kClamp}, tp_axis("e_tp")},
      fill2(batches, tps,
            [&](double b, double tp) { return cost.e_thr(b, as_int(tp)); }));
  p.l_attn_thr = InterpGrid(
      {GridAxis{"llm_seq_len", seqs, OutOfRange::kClamp}, tp_axis("l_tp")},
      fill2(seqs, tps, [&](double s, double tp) {
        return cost.l_attn_thr(s, as_int(tp));
      }));
  p.l_lin_thr = InterpGrid(
      {GridAxis{"llm_seq_len", seqs, OutOfRange::kClamp}, tp_axis("l_tp")},
      fill2(seqs, tps, [&](double s, double tp) {
        return cost.l_lin_thr(s, as_int(tp));
      }));
  p.e_model_state = InterpGrid(
      {layer_axis, tp_axis("e_tp")},
      fill2(layers, tps, [&](double l, double tp) {
        return cost.e_model_state(l, as_int(tp));
      }));
  p.l_model_state = InterpGrid(
      {layer_axis, tp_axis("l_tp")},
      fill2(layers, tps, [&](double l, double tp) {
        return cost.l_model_state(l, as_int(tp));
      }));
  p.e_act_state = InterpGrid(
      {layer_axis, tp_axis("e_tp"),
       GridAxis{"enc_batch", batches0, OutOfRange::kClamp}},
      fill3(layers, tps, batches0, [&](double l, double tp, double b) {
        return cost.e_act_state(l, as_int(tp), b);
      }));
  p.l_act_state = InterpGrid(
      {layer_axis, tp_axis("l_tp"),
       GridAxis{"llm_seq_len", seqs0, OutOfRange::kClamp}},
      fill3(layers, tps, seqs0, [&](double l, double tp, double s) {
        return cost.l_act_state(l, as_int(tp), s);
      }));
  return p;
}

}  // namespace mmplan
