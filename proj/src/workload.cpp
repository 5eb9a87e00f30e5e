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

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

namespace mmplan {
namespace {

using json = nlohmann::json;

std::int64_t require_int(const json& rec, const char* field, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end()) throw ManifestError(line, field, "missing field");
  if (!it->is_number_integer()) {
    throw ManifestError(line, field, "expected an integer");
  }
  return it->get<std::int64_t>();
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InputError("quantile of an empty sample");
  if (!(q > 0.0) || q > 1.0) throw InputError("quantile must be in (0, 1]");
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace

ManifestError::ManifestError(std::size_t line, std::string field,
                             const std::string& what)
    : InputError("manifest line " + std::to_string(line) + ", field '" +
                 field + "': " + what),
      line_(line),
      field_(std::move(field)) {}

std::vector<DataItem> ingest_manifest(std::istream& in) {
  std::vector<DataItem> items;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ManifestError(line, "<record>", e.what());
    }
    if (!rec.is_object()) {
      throw ManifestError(line, "<record>", "expected a JSON object");
    }
    DataItem item;
    auto id = rec.find("id");
    if (id == rec.end()) throw ManifestError(line, "id", "missing field");
    if (id->is_string()) {
      item.id = id->get<std::string>();
    } else if (id->is_number_integer()) {
      item.id = std::to_string(id->get<std::int64_t>());
    } else {
      throw ManifestError(line, "id", "expected a string");
    }
    item.enc_batch = require_int(rec, "enc_batch", line);
    item.llm_seq_len = require_int(rec, "llm_seq_len", line);
    if (item.enc_batch < 0) {
      throw ManifestError(line, "enc_batch", "must be >= 0");
    }
    if (item.llm_seq_len < 1) {
      throw ManifestError(line, "llm_seq_len", "must be >= 1");
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<DataItem> sample_dataset(std::span<const DataItem> items,
                                     std::size_t n, std::uint64_t seed) {
  if (items.empty()) throw InputError("cannot sample an empty dataset");
  if (n == 0) throw InputError("sample size must be >= 1");
  if (n >= items.size()) return {items.begin(), items.end()};
  std::vector<DataItem> out;
  out.reserve(n);
  std::mt19937_64 rng(seed);
  std::sample(items.begin(), items.end(), std::back_inserter(out), n, rng);
  return out;
}

Bucketing Bucketing::fixed(std::int64_t width) {
  if (width < 1) throw InputError("bucket width must be >= 1");
  return {Kind::kFixed, width};
}

std::int64_t Bucketing::bucket_of(std::int64_t value) const {
  if (value <= 0) return 0;
  if (kind == Kind::kFixed) return (value / width) * width;
  std::int64_t edge = 1;
  while (edge <= value / 2) edge *= 2;
  return edge;
}

double ShapeDistribution::enc_batch_quantile(double q) const {
  std::vector<double> v;
  v.reserve(sample.size());
  for (const DataItem& d : sample) v.push_back(double(d.enc_batch));
  return quantile(std::move(v), q);
}

double ShapeDistribution::llm_seq_quantile(double q) const {
  std::vector<double> v;
  v.reserve(sample.size());
  for (const DataItem& d : sample) v.push_back(double(d.llm_seq_len));
  return quantile(std::move(v), q);
}

ShapeDistribution build_distribution(std::span<const DataItem> sample,
                                     Bucketing enc_bucketing,
                                     Bucketing seq_bucketing) {
  if (sample.empty()) throw InputError("cannot build a distribution from an empty sample");
  ShapeDistribution dist;
  dist.enc_bucketing = enc_bucketing;
  dist.seq_bucketing = seq_bucketing;
  dist.sample.assign(sample.begin(), sample.end());
  double enc_sum = 0.0;
  double seq_sum = 0.0;
  for (const DataItem& d : sample) {
    ++dist.enc_batch_hist[enc_bucketing.bucket_of(d.enc_batch)];
    ++dist.llm_seq_hist[seq_bucketing.bucket_of(d.llm_seq_len)];
    enc_sum += static_cast<double>(d.enc_batch);
    seq_sum += static_cast<double>(d.llm_seq_len);
  }
  const double n = static_cast<double>(sample.size());
  dist.mean_enc_batch = enc_sum / n;
  dist.mean_llm_seq = seq_sum / n;
  return dist;
}

double encoder_flops(double enc_batch, const ModelSpec& spec) {
  const double h = spec.e_hidden;
  return 24.0 * spec.e_layers * h * h * (enc_batch * spec.e_seq_len);
}

double llm_lin_flops(double packed_seq, const ModelSpec& spec) {
  const double h = spec.l_hidden;
  return 24.0 * spec.l_layers * h * h * packed_seq;
}

double llm_attn_flops(double seq_sq_sum, const ModelSpec& spec) {
  return 4.0 * spec.l_layers * double(spec.l_hidden) * seq_sq_sum;
}

FlopLoad item_flops(const DataItem& item, const ModelSpec& spec) {
  const double s = static_cast<double>(item.llm_seq_len);
  return {encoder_flops(static_cast<double>(item.enc_batch), spec),
          llm_attn_flops(s * s, spec), llm_lin_flops(s, spec)};
}

FlopLoad packed_flops(std::span<const DataItem> items, const ModelSpec& spec) {
  FlopLoad total;
  for (const DataItem& d : items) total += item_flops(d, spec);
  return total;
}

}  // namespace mmplan
