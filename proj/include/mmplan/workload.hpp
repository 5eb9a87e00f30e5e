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

#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mmplan/domain.hpp"

namespace mmplan {

// Malformed manifest record; `line` is 1-based.
class ManifestError : public InputError {
 public:
  ManifestError(std::size_t line, std::string field, const std::string& what);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

// Reads one JSON object per line: {"id": str, "enc_batch": int,
// "llm_seq_len": int}. Blank lines are skipped.
std::vector<DataItem> ingest_manifest(std::istream& in);

// Uniform sample without replacement (order of the source preserved);
// the full list when n >= items.size(). Throws InputError on empty input or
// n == 0.
std::vector<DataItem> sample_dataset(std::span<const DataItem> items,
                                     std::size_t n, std::uint64_t seed);

// Histogram bucketing: power-of-two lower edges (0, 1, 2, 4, ...) or fixed
// width edges (0, w, 2w, ...).
struct Bucketing {
  enum class Kind { kPow2, kFixed };
  Kind kind = Kind::kPow2;
  std::int64_t width = 1;

  static Bucketing pow2() { return {}; }
  static Bucketing fixed(std::int64_t width);

  std::int64_t bucket_of(std::int64_t value) const;
  bool operator==(const Bucketing&) const = default;
};

struct ShapeDistribution {
  std::map<std::int64_t, std::int64_t> enc_batch_hist;
  std::map<std::int64_t, std::int64_t> llm_seq_hist;
  std::vector<DataItem> sample;
  double mean_enc_batch = 0.0;
  double mean_llm_seq = 0.0;
  Bucketing enc_bucketing;
  Bucketing seq_bucketing;

  // Nearest-rank quantiles of the raw sample, q in (0, 1].
  double enc_batch_quantile(double q) const;
  double llm_seq_quantile(double q) const;
};

ShapeDistribution build_distribution(std::span<const DataItem> sample,
                                     Bucketing enc_bucketing = {},
                                     Bucketing seq_bucketing = {});

// Forward-pass FLOPs of one encoder instance (e_flops) and one LLM
// instance split into attention and linear parts.
struct FlopLoad {
  double e_flops = 0.0;
  double l_attn_flops = 0.0;
  double l_lin_flops = 0.0;

  FlopLoad& operator+=(const FlopLoad& o) {
    e_flops += o.e_flops;
    l_attn_flops += o.l_attn_flops;
    l_lin_flops += o.l_lin_flops;
    return *this;
  }
};

// Dense transformer accounting:
//   e_flops      = 24 * E_l * E_h^2 * enc_batch * e_seq_len
//   l_lin_flops  = 24 * L_l * L_h^2 * seq
//   l_attn_flops =  4 * L_l * L_h   * seq^2
FlopLoad item_flops(const DataItem& item, const ModelSpec& spec);

// Real-valued variants used for averaged shapes. `packed_seq` is the total
// packed length and `seq_sq_sum` the sum of squared instance lengths.
double encoder_flops(double enc_batch, const ModelSpec& spec);
double llm_lin_flops(double packed_seq, const ModelSpec& spec);
double llm_attn_flops(double seq_sq_sum, const ModelSpec& spec);

// Packed microbatch load: linear work on the summed length, attention per
// instance.
FlopLoad packed_flops(std::span<const DataItem> items, const ModelSpec& spec);

}  // namespace mmplan
