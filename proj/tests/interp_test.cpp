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

#include "mmplan/interp.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace mmplan {
namespace {

InterpGrid bilinear_grid() {
  const std::vector<double> xs = {1, 2, 4, 8, 16};
  const std::vector<double> ys = {0, 3, 10};
  std::vector<double> v;
  for (double x : xs) {
    for (double y : ys) v.push_back(oracle::bilinear(x, y));
  }
  return InterpGrid({{"x", xs}, {"y", ys}}, v);
}

TEST(InterpGrid, ReproducesKnots) {
  const InterpGrid g = bilinear_grid();
  for (double x : g.axes()[0].coords) {
    for (double y : g.axes()[1].coords) EXPECT_EQ(g({x, y}), oracle::bilinear(x, y));
  }
}

TEST(InterpGrid, ExactForBilinearInterior) {
  const InterpGrid g = bilinear_grid();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(1.0, 16.0), uy(0.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = ux(rng), y = uy(rng);
    EXPECT_NEAR(g({x, y}), oracle::bilinear(x, y), 1e-12 * (1.0 + oracle::bilinear(x, y)));
  }
}

TEST(InterpGrid, OutOfRangePolicies) {
  InterpGrid clamp({{"x", {1, 2}}}, {10, 20});
  EXPECT_EQ(clamp({0.0}), 10.0);
  EXPECT_EQ(clamp({5.0}), 20.0);
  InterpGrid linear({{"x", {1, 2}, OutOfRange::kLinear}}, {10, 20});
  EXPECT_DOUBLE_EQ(linear({4.0}), 40.0);
  EXPECT_DOUBLE_EQ(linear({0.5}), 5.0);
}

TEST(InterpGrid, SingleKnotAxisIsConstant) {
  const InterpGrid g({{"x", {1, 3}}, {"tp", {1}}}, {2, 6});
  EXPECT_EQ(g({2.0, 1.0}), 4.0);
  EXPECT_EQ(g({2.0, 8.0}), 4.0);
}

TEST(InterpGrid, RejectsMalformedGrids) {
  EXPECT_THROW(InterpGrid({{"x", {}}}, {}), std::exception);
  EXPECT_THROW(InterpGrid({{"x", {2, 1}}}, {1, 2}), std::exception);
  EXPECT_THROW(InterpGrid({{"x", {1, 2}}}, {1, 2, 3}), std::exception);
  EXPECT_THROW(InterpGrid({{"x", {1, 2}}}, {1, -2}), std::exception);
  const InterpGrid g = bilinear_grid();
  EXPECT_THROW(g({1.0}), std::exception);
}

TEST(InterpGrid, LeadingBlendMatchesDirectQuery) {
  std::vector<double> v(3 * 2 * 4);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.37 * double(i * i % 11);
  const InterpGrid g({{"a", {1, 2, 4}, OutOfRange::kLinear}, {"b", {1, 8}}, {"c", {0, 1, 5, 9}}},
                     v);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ua(0.5, 6.0), ub(1, 8), uc(0, 9);
  std::vector<double> knots(3);
  for (int i = 0; i < 500; ++i) {
    const double a = ua(rng), rest[2] = {ub(rng), uc(rng)};
    g.leading_knot_values(rest, knots);
    const double direct = g({a, rest[0], rest[1]});
    EXPECT_EQ(g.blend_leading(knots, a), direct);
  }
}

TEST(InterpGrid, TransformedSeesIndices) {
  const InterpGrid g = bilinear_grid();
  const InterpGrid h = g.transformed(
      [&](double v, const std::vector<std::size_t>& idx) { return v * g.axes()[0].coords[idx[0]]; });
  const std::size_t idx[2] = {2, 1};
  EXPECT_EQ(h.at_index(idx), g.at_index(idx) * 4.0);
  EXPECT_FALSE(h == g);
  EXPECT_TRUE(g == bilinear_grid());
}

}  // namespace
}  // namespace mmplan
