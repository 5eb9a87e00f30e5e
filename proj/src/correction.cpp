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

#include "mmplan/correction.hpp"

#include <numeric>

namespace mmplan {

CorrectionTracker::CorrectionTracker(Bucketing enc_bucketing,
                                     Bucketing seq_bucketing, double smoothing)
    : enc_bucketing_(enc_bucketing),
      seq_bucketing_(seq_bucketing),
      smoothing_(smoothing) {
  if (!(smoothing > 0.0) || smoothing > 1.0) {
    throw InputError("correction smoothing must be in (0, 1]");
  }
}

ShapeKey CorrectionTracker::key_for(Module module, const DataItem& item) const {
  if (module == Module::kEncoder) {
    return {module, enc_bucketing_.bucket_of(item.enc_batch)};
  }
  return {module, seq_bucketing_.bucket_of(item.llm_seq_len)};
}

const ShapeCorrection& CorrectionTracker::record_observation(ShapeKey key,
                                                             double predicted,
                                                             double actual) {
  ShapeCorrection& c = corrections_[key];
  c.predicted = predicted;
  c.observed = c.observations == 0
                   ? actual
                   : smoothing_ * actual + (1.0 - smoothing_) * c.observed;
  ++c.observations;
  c.deviation = c.observed - c.predicted;
  return c;
}

bool CorrectionTracker::cost_benefit_step(
    double cost, std::size_t window, std::span<const double> realized_benefits) {
  if (window == 0) throw InputError("cost-benefit window must be >= 1");
  if (!active_) return false;
  if (realized_benefits.empty()) return active_;
  const std::size_t n = std::min(window, realized_benefits.size());
  const auto recent = realized_benefits.last(n);
  const double mean =
      std::accumulate(recent.begin(), recent.end(), 0.0) / static_cast<double>(n);
  active_ = mean > cost;
  return active_;
}

std::optional<double> CorrectionTracker::duration_factor(ShapeKey key) const {
  if (!active_) return std::nullopt;
  const ShapeCorrection* c = find(key);
  if (c == nullptr || c->deviation == 0.0 || !(c->observed > 0.0)) {
    return std::nullopt;
  }
  return c->predicted / c->observed;
}

const ShapeCorrection* CorrectionTracker::find(ShapeKey key) const {
  auto it = corrections_.find(key);
  return it == corrections_.end() ? nullptr : &it->second;
}

}  // namespace mmplan
