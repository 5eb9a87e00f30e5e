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

#include "mmplan/pipesim.hpp"

namespace mmplan {

std::vector<RouteRange> split_even(std::size_t items, int groups) {
  if (groups < 1) throw InputError("group count must be >= 1");
  const auto g = static_cast<std::size_t>(groups);
  std::vector<RouteRange> out;
  out.reserve(g);
  std::size_t begin = 0;
  for (std::size_t k = 0; k < g; ++k) {
    const std::size_t count = items / g + (k < items % g ? 1 : 0);
    out.push_back({static_cast<int>(k), begin, begin + count});
    begin += count;
  }
  return out;
}

RoutingPlan plan_routing(int e_dp, int l_dp, std::size_t items_per_step) {
  if (e_dp < 1 || l_dp < 1) throw InputError("data-parallel degrees must be >= 1");
  if (items_per_step == 0) throw InputError("routing needs at least one item");
  RoutingPlan plan;
  plan.communicator = 0;
  plan.gather = split_even(items_per_step, e_dp);
  plan.scatter = split_even(items_per_step, l_dp);
  return plan;
}

}  // namespace mmplan
