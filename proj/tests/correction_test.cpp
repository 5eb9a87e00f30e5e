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

#include <gtest/gtest.h>

#include <vector>

namespace mmplan {
namespace {

TEST(CorrectionTracker, ExponentialAverage) {
  CorrectionTracker t(Bucketing::pow2(), Bucketing::fixed(512), 0.2);
  const ShapeKey k = t.key_for(Module::kLlm, {"a", 1, 1000});
  EXPECT_EQ(k.bucket, 512);
  EXPECT_EQ(t.record_observation(k, 100, 80).observed, 80.0);
  const ShapeCorrection& c = t.record_observation(k, 100, 60);
  EXPECT_DOUBLE_EQ(c.observed, 0.2 * 60 + 0.8 * 80);
  EXPECT_DOUBLE_EQ(c.deviation, c.observed - 100);
  EXPECT_EQ(c.observations, 2);
  EXPECT_THROW(CorrectionTracker({}, {}, 0.0), InputError);
}

TEST(CorrectionTracker, DurationFactorIsThroughputRatio) {
  CorrectionTracker t;
  const ShapeKey k{Module::kEncoder, 4};
  EXPECT_FALSE(t.duration_factor(k));
  t.record_observation(k, 100, 50);
  ASSERT_TRUE(t.duration_factor(k));
  EXPECT_DOUBLE_EQ(*t.duration_factor(k), 2.0);
  const ShapeKey exact{Module::kEncoder, 8};
  t.record_observation(exact, 100, 100);
  EXPECT_FALSE(t.duration_factor(exact));
}

TEST(CorrectionTracker, DeactivationIsPermanent) {
  CorrectionTracker t;
  const ShapeKey k{Module::kLlm, 1};
  t.record_observation(k, 10, 5);
  const std::vector<double> good = {3, 4, 5};
  EXPECT_TRUE(t.cost_benefit_step(1.0, 3, good));
  const std::vector<double> poor = {3, 4, 5, 0.1, 0.2, 0.3};
  EXPECT_FALSE(t.cost_benefit_step(1.0, 3, poor));
  EXPECT_FALSE(t.active());
  EXPECT_FALSE(t.duration_factor(k));
  EXPECT_FALSE(t.cost_benefit_step(1.0, 3, good));
}

TEST(CorrectionTracker, BenefitEqualToCostDeactivates) {
  CorrectionTracker t;
  const std::vector<double> even = {2, 2};
  EXPECT_FALSE(t.cost_benefit_step(2.0, 2, even));
  CorrectionTracker u;
  EXPECT_THROW(u.cost_benefit_step(1.0, 0, even), InputError);
  EXPECT_TRUE(u.cost_benefit_step(1.0, 4, {}));
}

}  // namespace
}  // namespace mmplan
