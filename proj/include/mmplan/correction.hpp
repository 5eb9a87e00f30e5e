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
#include <map>
#include <optional>
#include <span>

#include "mmplan/domain.hpp"
#include "mmplan/workload.hpp"

namespace mmplan {

enum class Module { kEncoder, kLlm };

// Shape bucket of one module: encoder keyed by enc_batch bucket, LLM by
// llm_seq_len bucket, using the workload histogram bucketing.
struct ShapeKey {
  Module module = Module::kLlm;
  std::int64_t bucket = 0;
  auto operator<=>(const ShapeKey&) const = default;
};

struct ShapeCorrection {
  double predicted = 0.0;  // interpolated throughput
  double observed = 0.0;   // exponential average of measured throughput
  double deviation = 0.0;  // observed - predicted
  std::int64_t observations = 0;
};

// Runtime throughput feedback for shapes whose measured throughput departs
// from the interpolated model, gated by a cost-benefit rule.
//
// Single writer: the training loop owns the tracker and mutates it between
// iterations; schedulers read copies or const references.
class CorrectionTracker {
 public:
  explicit CorrectionTracker(Bucketing enc_bucketing = {},
                             Bucketing seq_bucketing = {},
                             double smoothing = 0.2);

  ShapeKey key_for(Module module, const DataItem& item) const;

  // Folds one throughput measurement into the bucket's exponential average
  // (the first observation initializes it) and refreshes B = observed -
  // predicted.
  const ShapeCorrection& record_observation(ShapeKey key, double predicted,
                                            double actual);

  // Cost-benefit gate over the last `window` realized benefits (seconds per
  // iteration): stays active only while their mean strictly exceeds `cost`.
  // Once deactivated the tracker stays off. Returns the new active flag.
  bool cost_benefit_step(double cost, std::size_t window,
                         std::span<const double> realized_benefits);

  // predicted / observed for a corrected bucket, when active. Multiplying a
  // predicted duration by this factor yields the corrected duration.
  std::optional<double> duration_factor(ShapeKey key) const;

  bool active() const { return active_; }
  double smoothing() const { return smoothing_; }
  const std::map<ShapeKey, ShapeCorrection>& corrections() const {
    return corrections_;
  }
  const ShapeCorrection* find(ShapeKey key) const;

 private:
  Bucketing enc_bucketing_;
  Bucketing seq_bucketing_;
  double smoothing_;
  bool active_ = true;
  std::map<ShapeKey, ShapeCorrection> corrections_;
};

}  // namespace mmplan
