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

#include "mmplan/workload.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

namespace mmplan {
namespace {

const ModelSpec kSpec{27, 32, 1152, 4096, 729};

std::vector<DataItem> parse(const std::string& text) {
  std::istringstream in(text);
  return ingest_manifest(in);
}

std::vector<DataItem> ramp(int n) {
  std::vector<DataItem> items;
  for (int i = 0; i < n; ++i) items.push_back({"i" + std::to_string(i), i % 7, 1 + 13 * i});
  return items;
}

TEST(Manifest, ParsesRecordsAndSkipsBlankLines) {
  const auto items = parse(
      "{\"id\": \"a\", \"enc_batch\": 4, \"llm_seq_len\": 900}\n\n"
      "{\"id\": 17, \"enc_batch\": 0, \"llm_seq_len\": 12}\n");
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0], (DataItem{"a", 4, 900}));
  EXPECT_EQ(items[1], (DataItem{"17", 0, 12}));
}

TEST(Manifest, ErrorsNameLineAndField) {
  try {
    parse("{\"id\":\"a\",\"enc_batch\":1,\"llm_seq_len\":5}\n{\"id\":\"b\",\"enc_batch\":1}\n");
    FAIL();
  } catch (const ManifestError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "llm_seq_len");
  }
  EXPECT_THROW(parse("{\"id\":\"a\",\"enc_batch\":-1,\"llm_seq_len\":5}\n"), ManifestError);
  EXPECT_THROW(parse("{\"id\":\"a\",\"enc_batch\":1,\"llm_seq_len\":0}\n"), ManifestError);
  EXPECT_THROW(parse("not json\n"), ManifestError);
  EXPECT_THROW(parse("[1,2]\n"), ManifestError);
}

TEST(Sample, DeterministicOrderPreservingAndSaturating) {
  const auto items = ramp(500);
  const auto a = sample_dataset(items, 50, 11);
  EXPECT_EQ(a, sample_dataset(items, 50, 11));
  EXPECT_NE(a, sample_dataset(items, 50, 12));
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 1; i < a.size(); ++i) {
    EXPECT_LT(std::stoi(a[i - 1].id.substr(1)), std::stoi(a[i].id.substr(1)));
  }
  EXPECT_EQ(sample_dataset(items, 5000, 1), items);
  EXPECT_THROW(sample_dataset({}, 3, 1), InputError);
  EXPECT_THROW(sample_dataset(items, 0, 1), InputError);
}

TEST(Bucketing, Edges) {
  const Bucketing p = Bucketing::pow2();
  EXPECT_EQ(p.bucket_of(0), 0);
  EXPECT_EQ(p.bucket_of(1), 1);
  EXPECT_EQ(p.bucket_of(3), 2);
  EXPECT_EQ(p.bucket_of(1000), 512);
  const Bucketing f = Bucketing::fixed(100);
  EXPECT_EQ(f.bucket_of(99), 0);
  EXPECT_EQ(f.bucket_of(250), 200);
  EXPECT_THROW(Bucketing::fixed(0), InputError);
}

TEST(Distribution, MeansHistogramsAndQuantiles) {
  const auto items = ramp(100);
  const ShapeDistribution d = build_distribution(items, Bucketing::pow2(), Bucketing::fixed(256));
  double e = 0, s = 0;
  for (const auto& it : items) {
    e += double(it.enc_batch);
    s += double(it.llm_seq_len);
  }
  EXPECT_NEAR(d.mean_enc_batch, e / 100, 1e-12);
  EXPECT_NEAR(d.mean_llm_seq, s / 100, 1e-12);
  auto total = [](const auto& h) {
    return std::accumulate(h.begin(), h.end(), std::int64_t{0},
                           [](std::int64_t a, const auto& kv) { return a + kv.second; });
  };
  EXPECT_EQ(total(d.enc_batch_hist), 100);
  EXPECT_EQ(total(d.llm_seq_hist), 100);
  EXPECT_EQ(d.llm_seq_quantile(1.0), 1 + 13 * 99);
  EXPECT_EQ(d.llm_seq_quantile(0.5), 1 + 13 * 49);
  EXPECT_EQ(d.enc_batch_quantile(0.01), 0);
  EXPECT_THROW(d.llm_seq_quantile(0.0), InputError);
}

TEST(Flops, DenseTransformerAccounting) {
  const FlopLoad f = item_flops({"x", 3, 1000}, kSpec);
  EXPECT_DOUBLE_EQ(f.e_flops, 24.0 * 27 * 1152.0 * 1152.0 * 3 * 729);
  EXPECT_DOUBLE_EQ(f.l_lin_flops, 24.0 * 32 * 4096.0 * 4096.0 * 1000);
  EXPECT_DOUBLE_EQ(f.l_attn_flops, 4.0 * 32 * 4096.0 * 1000.0 * 1000.0);
  const std::vector<DataItem> two = {{"a", 1, 100}, {"b", 2, 300}};
  const FlopLoad packed = packed_flops(two, kSpec);
  EXPECT_DOUBLE_EQ(packed.l_lin_flops, llm_lin_flops(400, kSpec));
  EXPECT_DOUBLE_EQ(packed.l_attn_flops, llm_attn_flops(100.0 * 100 + 300.0 * 300, kSpec));
  EXPECT_DOUBLE_EQ(packed.e_flops, encoder_flops(3, kSpec));
}

}  // namespace
}  // namespace mmplan
