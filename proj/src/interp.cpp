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

#include <algorithm>
#include <array>
#include <cmath>

#include "mmplan/domain.hpp"

namespace mmplan {
namespace {

inline double combine(double a, double b, double t) {
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return (1.0 - t) * a + t * b;
}

}  // namespace

InterpGrid::InterpGrid(std::vector<GridAxis> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  if (axes_.empty() || axes_.size() > kMaxRank) {
    throw InputError("interpolation grid rank must be between 1 and 4");
  }
  std::size_t expected = 1;
  for (const GridAxis& axis : axes_) {
    if (axis.coords.empty()) {
      throw InputError("axis '" + axis.name + "' has no knots");
    }
    for (std::size_t i = 0; i < axis.coords.size(); ++i) {
      if (!std::isfinite(axis.coords[i])) {
        throw InputError("axis '" + axis.name + "' has a non-finite knot");
      }
      if (i > 0 && !(axis.coords[i] > axis.coords[i - 1])) {
        throw InputError("axis '" + axis.name + "' is not strictly increasing");
      }
    }
    expected *= axis.coords.size();
  }
  if (values_.size() != expected) {
    throw InputError("grid holds " + std::to_string(values_.size()) +
                     " values, axes require " + std::to_string(expected));
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InputError("grid values must be finite and non-negative");
    }
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t a = axes_.size() - 1; a-- > 0;) {
    strides_[a] = strides_[a + 1] * axes_[a + 1].coords.size();
  }
}

InterpGrid::Bracket InterpGrid::locate(std::size_t axis, double x) const {
  const std::vector<double>& c = axes_[axis].coords;
  const std::size_t n = c.size();
  const bool linear = axes_[axis].out_of_range == OutOfRange::kLinear;
  if (n == 1) return {0, 0.0};  // constant along a single-knot axis
  if (x <= c.front()) {
    if (!linear || x == c.front()) return {0, 0.0};
    return {0, (x - c[0]) / (c[1] - c[0])};
  }
  if (x >= c.back()) {
    if (!linear || x == c.back()) return {n - 2, 1.0};
    return {n - 2, (x - c[n - 2]) / (c[n - 1] - c[n - 2])};
  }
  const std::size_t hi = static_cast<std::size_t>(
      std::upper_bound(c.begin(), c.end(), x) - c.begin());
  const std::size_t lo = hi - 1;
  return {lo, (x - c[lo]) / (c[hi] - c[lo])};
}

double InterpGrid::reduce(std::size_t axis, std::size_t offset,
                          const Bracket* brackets) const {
  if (axis == axes_.size()) return values_[offset];
  const Bracket& br = brackets[axis];
  const std::size_t base = offset + br.lo * strides_[axis];
  const double a = reduce(axis + 1, base, brackets);
  if (br.t == 0.0) return a;
  const double b = reduce(axis + 1, base + strides_[axis], brackets);
  return combine(a, b, br.t);
}

double InterpGrid::operator()(std::span<const double> coords) const {
  if (coords.size() != rank()) {
    throw InputError("interpolation query has " +
                     std::to_string(coords.size()) + " coordinates, grid has " +
                     std::to_string(rank()) + " axes");
  }
  std::array<Bracket, kMaxRank> brackets{};
  for (std::size_t a = 0; a < rank(); ++a) brackets[a] = locate(a, coords[a]);
  return reduce(0, 0, brackets.data());
}

void InterpGrid::leading_knot_values(std::span<const double> rest,
                                     std::span<double> out) const {
  if (rest.size() + 1 != rank() || out.size() != axes_[0].coords.size()) {
    throw InputError("leading_knot_values: shape mismatch");
  }
  std::array<Bracket, kMaxRank> brackets{};
  for (std::size_t a = 1; a < rank(); ++a) brackets[a] = locate(a, rest[a - 1]);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = reduce(1, k * strides_[0], brackets.data());
  }
}

double InterpGrid::blend_leading(std::span<const double> knot_values,
                                 double x0) const {
  const Bracket br = locate(0, x0);
  if (br.t == 0.0) return knot_values[br.lo];
  return combine(knot_values[br.lo], knot_values[br.lo + 1], br.t);
}

double InterpGrid::at_index(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < rank(); ++a) flat += index[a] * strides_[a];
  return values_.at(flat);
}

}  // namespace mmplan
