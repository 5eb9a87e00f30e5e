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

#include "mmplan/documents.hpp"

#include <gtest/gtest.h>

#include <iomanip>
#include <sstream>

#include "fixtures.hpp"

namespace mmplan {
namespace {

const ModelSpec kSpec{4, 6, 256, 512, 64};

std::string table_of(const PerfProfile& p, std::size_t skip_row = SIZE_MAX) {
  std::ostringstream os;
  os << std::setprecision(17) << "grid,c0,c1,c2,value\n# comment\n";
  const std::pair<const char*, const InterpGrid*> grids[] = {
      {"e_thr", &p.e_thr},           {"l_attn_thr", &p.l_attn_thr},
      {"l_lin_thr", &p.l_lin_thr},   {"e_model_state", &p.e_model_state},
      {"l_model_state", &p.l_model_state}, {"e_act_state", &p.e_act_state},
      {"l_act_state", &p.l_act_state}};
  std::size_t row = 0;
  for (auto [name, g] : grids) {
    std::vector<std::size_t> idx(g->rank(), 0);
    for (std::size_t flat = 0; flat < g->values().size(); ++flat) {
      std::size_t rem = flat;
      for (std::size_t a = g->rank(); a-- > 0;) {
        idx[a] = rem % g->axes()[a].coords.size();
        rem /= g->axes()[a].coords.size();
      }
      if (row++ == skip_row) continue;
      os << name;
      for (std::size_t a = 0; a < g->rank(); ++a) os << "," << g->axes()[a].coords[idx[a]];
      os << "," << g->at_index(idx) << "\n";
    }
  }
  return os.str();
}

PerfProfile small_profile() {
  SynthParams params;
  params.max_enc_batch = 64;
  params.max_llm_seq = 4096;
  return synth_profile(kSpec, {8, 4, 1e9}, params);
}

TEST(Documents, ScalarRoundTrips) {
  const ClusterSpec c{16, 8, 85899345920.0};
  const ClusterSpec c2 = cluster_from_json(to_json(c));
  EXPECT_EQ(c2.n_gpus, 16);
  EXPECT_EQ(c2.mem_per_gpu, c.mem_per_gpu);
  const ModelSpec s = model_from_json(to_json(kSpec));
  EXPECT_EQ(s.e_seq_len, kSpec.e_seq_len);
  const ParallelPlan p{{1, 2, 3}, {4, 5, 6}, 7};
  EXPECT_EQ(plan_from_json(to_json(p)), p);
  PlanEvaluation ev{p, 0.1, 1.0 / 3.0, 2.0 / 7.0, 1e-300, 123.456, 7e10, true};
  const PlanEvaluation ev2 = evaluation_from_json(json::parse(to_json(ev).dump()));
  EXPECT_EQ(ev2.plan, p);
  EXPECT_EQ(ev2.est_l_dur, ev.est_l_dur);
  EXPECT_EQ(ev2.est_makespan, ev.est_makespan);
  EXPECT_EQ(ev2.objective, ev.objective);
}

TEST(Documents, ProfileRoundTripIsExact) {
  const ProfileDocument doc{small_profile(), kSpec, 4};
  const ProfileDocument back = profile_from_json(json::parse(profile_to_json(doc).dump()));
  EXPECT_EQ(back.profile, doc.profile);
  EXPECT_EQ(back.gpus_per_node, 4);
}

TEST(Documents, PerGpuBasisMultipliesByTp) {
  const ProfileDocument doc{small_profile(), kSpec, 4};
  json j = profile_to_json(doc);
  j["throughput_basis"] = "per_gpu";
  const ProfileDocument back = profile_from_json(j);
  EXPECT_EQ(back.profile.e_thr({8, 4}), 4 * doc.profile.e_thr({8, 4}));
  EXPECT_EQ(back.profile.e_model_state, doc.profile.e_model_state);
}

TEST(Documents, TableFitRoundTrips) {
  const PerfProfile p = small_profile();
  std::istringstream in(table_of(p));
  EXPECT_EQ(fit_profile_table(in), p);
}

TEST(Documents, TableMissingPointIsNamed) {
  std::istringstream in(table_of(small_profile(), 5));
  try {
    fit_profile_table(in);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("e_thr is missing point (enc_batch="),
              std::string::npos)
        << e.what();
  }
  std::istringstream dup("e_thr,1,1,5\ne_thr,1,1,6\n");
  EXPECT_THROW(fit_profile_table(dup), InputError);
  std::istringstream bad("nonsense,1,2\n");
  EXPECT_THROW(fit_profile_table(bad), InputError);
}

TEST(Documents, DistributionRoundTrip) {
  const auto items = fixture::random_items(80, 4);
  const ShapeDistribution d = build_distribution(items, Bucketing::fixed(3), Bucketing::pow2());
  const ShapeDistribution back = distribution_from_json(json::parse(to_json(d).dump()));
  EXPECT_EQ(back.sample, d.sample);
  EXPECT_EQ(back.enc_batch_hist, d.enc_batch_hist);
  EXPECT_EQ(back.llm_seq_hist, d.llm_seq_hist);
  EXPECT_EQ(back.mean_enc_batch, d.mean_enc_batch);
  EXPECT_EQ(back.mean_llm_seq, d.mean_llm_seq);
  EXPECT_EQ(back.enc_bucketing, d.enc_bucketing);
}

TEST(Documents, ScheduleRoundTripAndValidation) {
  const auto items = fixture::random_items(10, 2);
  ScheduleDocument doc;
  doc.plan = {{1, 1, 1}, {1, 1, 2}, 1};
  doc.gbs = 5;
  const auto batches = slice_batches(items, 5);
  ASSERT_EQ(batches.size(), 2u);
  for (std::size_t t = 0; t < 2; ++t) {
    Assignment a;
    a.buckets = {{0, 2, 4}, {1, 3}};
    a.c_max = 1.5;
    a.solver = SolverKind::kExact;
    a.optimality = Optimality::kProven;
    doc.batches.push_back({t, batches[t], a});
  }
  const json j = schedule_to_json(doc);
  const ScheduleDocument back = schedule_from_json(json::parse(j.dump()), items);
  EXPECT_EQ(back.plan, doc.plan);
  ASSERT_EQ(back.batches.size(), 2u);
  EXPECT_EQ(back.batches[1].items, batches[1]);
  EXPECT_EQ(back.batches[1].assignment.buckets, doc.batches[1].assignment.buckets);
  EXPECT_EQ(back.batches[1].assignment.solver, SolverKind::kExact);

  const std::vector<DataItem> missing(items.begin(), items.begin() + 3);
  EXPECT_THROW(schedule_from_json(j, missing), InputError);
  std::vector<DataItem> dup = items;
  dup.push_back(items[0]);
  EXPECT_THROW(schedule_from_json(j, dup), InputError);
}

TEST(Documents, SliceBatchesKeepsTail) {
  const auto items = fixture::random_items(11, 1);
  const auto b = slice_batches(items, 4);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[2].size(), 3u);
  EXPECT_THROW(slice_batches(items, 0), InputError);
}

}  // namespace
}  // namespace mmplan
