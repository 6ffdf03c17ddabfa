// Copyright 2026 The TVAPF Planner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TVAPF__RESAMPLER_HPP_
#define TVAPF__RESAMPLER_HPP_

#include "tvapf/bicycle_model.hpp"
#include "tvapf/geometry.hpp"
#include "tvapf/planner.hpp"

#include <stdexcept>
#include <vector>

namespace tvapf::resampler
{

class HorizonExhausted : public std::out_of_range
{
public:
  using std::out_of_range::out_of_range;
};

/// Planner state linearly interpolated at absolute time t; psi takes the shorter arc.
planner::FrenetState interpolate(const planner::PlannedTrajectory & traj, double t);

/// N_P + 1 Cartesian references at t_query + k * T_s. Throws HorizonExhausted when the last
/// sample lies beyond the trajectory or t_query precedes it.
std::vector<tracker::VehicleState> resample(
  const planner::PlannedTrajectory & traj, const geometry::ReferencePath & path, double t_query,
  int N_P, double T_s, double wheelbase);

}  // namespace tvapf::resampler

#endif  // TVAPF__RESAMPLER_HPP_
