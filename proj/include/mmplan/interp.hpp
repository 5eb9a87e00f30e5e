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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mmplan {

// Behaviour of a query coordinate that falls outside an axis' knot range.
enum class OutOfRange {
  kClamp,   // snap to the nearest boundary knot
  kLinear,  // extend the boundary segment linearly
};

struct GridAxis {
  std::string name;
  std::vector<double> coords;  // strictly increasing; one knot means constant
  OutOfRange out_of_range = OutOfRange::kClamp;

  bool operator==(const GridAxis&) const = default;
};

// Dense multilinear interpolation table. Values are stored row-major with
// the last axis varying fastest.
//
// Evaluation reduces the trailing axes first and blends along axis 0 last,
// so a query equals blend_leading(leading_knot_values(rest), x0) bit for
// bit. The planner relies on this to cache per-knot slices.
class InterpGrid {
 public:
  static constexpr std::size_t kMaxRank = 4;

  InterpGrid() = default;
  // Throws InputError on non-increasing axes, shape mismatch or values that
  // are negative or not finite.
  InterpGrid(std::vector<GridAxis> axes, std::vector<double> values);

  std::size_t rank() const { return axes_.size(); }
  const std::vector<GridAxis>& axes() const { return axes_; }
  const std::vector<double>& values() const { return values_; }

  // Throws InputError when coords.size() != rank().
  double operator()(std::span<const double> coords) const;
  double operator()(std::initializer_list<double> coords) const {
    return (*this)(std::span<const double>(coords.begin(), coords.size()));
  }

  // Interpolated value at every knot of axis 0, with the remaining axes at
  // `rest` (rank() - 1 coordinates). `out` must hold axes()[0].coords.size()
  // entries.
  void leading_knot_values(std::span<const double> rest,
                           std::span<double> out) const;
  // Blend of per-knot values along axis 0 at coordinate x0.
  double blend_leading(std::span<const double> knot_values, double x0) const;

  double at_index(std::span<const std::size_t> index) const;

  // Applies f to every stored value (used for unit conversion at load).
  template <typename F>
  InterpGrid transformed(F&& f) const {
    InterpGrid out = *this;
    std::vector<std::size_t> index(rank(), 0);
    for (std::size_t flat = 0; flat < values_.size(); ++flat) {
      std::size_t rem = flat;
      for (std::size_t a = rank(); a-- > 0;) {
        index[a] = rem % axes_[a].coords.size();
        rem /= axes_[a].coords.size();
      }
      out.values_[flat] = f(values_[flat], index);
    }
    return out;
  }

  bool operator==(const InterpGrid&) const = default;

 private:
  struct Bracket {
    std::size_t lo;
    double t;  // weight of knot lo + 1
  };
  Bracket locate(std::size_t axis, double x) const;
  double reduce(std::size_t axis, std::size_t offset,
                const Bracket* brackets) const;

  std::vector<GridAxis> axes_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
};

}  // namespace mmplan
