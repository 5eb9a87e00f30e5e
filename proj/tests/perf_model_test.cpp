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

#include <gtest/gtest.h>

namespace mmplan {
namespace {

const ModelSpec kSpec{27, 32, 1152, 4096, 729};

TEST(TpKnots, PowersOfTwoPlusNode) {
  EXPECT_EQ(tp_knots(8), (std::vector<double>{1, 2, 4, 8}));
  EXPECT_EQ(tp_knots(6), (std::vector<double>{1, 2, 4, 6}));
  EXPECT_EQ(tp_knots(1), (std::vector<double>{1}));
}

TEST(SynthProfile, TpAxesCoverTheNode) {
  const PerfProfile p = synth_profile(kSpec, {16, 8, 80e9});
  EXPECT_NO_THROW(p.check(8));
  EXPECT_THROW(p.check(4), InputError);
  for (const InterpGrid* g : {&p.e_thr, &p.l_attn_thr, &p.l_lin_thr, &p.e_model_state,
                              &p.l_model_state, &p.e_act_state, &p.l_act_state}) {
    EXPECT_EQ(g->axes()[1].coords, (std::vector<double>{1, 2, 4, 8}));
  }
}

TEST(SynthProfile, CostOverridesAreSampledAtKnots) {
  SynthParams params;
  params.cost.e_thr = [](double b, int tp) { return 1e12 * b * tp; };
  const PerfProfile p = synth_profile(kSpec, {8, 4, 80e9}, params);
  EXPECT_EQ(encoder_throughput(p, 64, 2), 1e12 * 64 * 2);
  EXPECT_DOUBLE_EQ(encoder_throughput(p, 48, 4), 1e12 * 48 * 4);
}

TEST(SynthProfile, ThroughputGrowsWithShapeAndTp) {
  const PerfProfile p = synth_profile(kSpec, {8, 8, 80e9});
  EXPECT_LT(encoder_throughput(p, 4, 1), encoder_throughput(p, 64, 1));
  EXPECT_LT(llm_lin_throughput(p, 512, 1), llm_lin_throughput(p, 512, 4));
  EXPECT_LT(llm_attn_throughput(p, 4096, 2), llm_lin_throughput(p, 4096, 2));
}

TEST(LlmDuration, SumsAttentionAndLinearParts) {
  const PerfProfile p = synth_profile(kSpec, {8, 8, 80e9});
  const double d = llm_duration(p, 3e12, 5e12, 1024, 2);
  EXPECT_DOUBLE_EQ(d, 3e12 / llm_attn_throughput(p, 1024, 2) +
                          5e12 / llm_lin_throughput(p, 1024, 2));
}

TEST(Memory, StageLayersAndInflightActivations) {
  const PerfProfile p = synth_profile(kSpec, {16, 8, 80e9});
  const ParallelPlan plan{{1, 2, 2}, {2, 3, 2}, 4};
  EXPECT_EQ(encoder_stage_layers(plan, kSpec), 14);
  EXPECT_EQ(llm_stage_layers(plan, kSpec), 11);
  const double e_model = p.e_model_state({14, 1});
  const double e_act = p.e_act_state({14, 1, 32});
  EXPECT_DOUBLE_EQ(encoder_memory(p, plan, kSpec, 32), e_model + 5 * e_act);
  const double l_model = p.l_model_state({11, 2});
  const double l_act = p.l_act_state({11, 2, 3000});
  EXPECT_DOUBLE_EQ(llm_memory(p, plan, kSpec, 3000), l_model + 3 * l_act);
  // Layer axis extrapolates linearly, so the synthetic model is exact.
  EXPECT_NEAR(l_model, 11 * 12.0 * 4096.0 * 4096.0 * 16.0 / 2, 1e-6 * l_model);
}

}  // namespace
}  // namespace mmplan
