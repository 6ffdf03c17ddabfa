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

#include "tvapf/resampler.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace tvapf::resampler
{
namespace
{
constexpr double kTimeSlack = 1e-9;

// Segment index and fraction for time t.
std::pair<std::size_t, double> locate(const planner::PlannedTrajectory & traj, double t)
{
  if (traj.inputs.empty() || t < traj.t0 - kTimeSlack || t > traj.end_time() + kTimeSlack) {
    throw HorizonExhausted(fmt::format(
      "time {:.3f} s outside trajectory [{:.3f}, {:.3f}] s", t, traj.t0, traj.end_time()));
  }
  const double u = std::max(0.0, (t - traj.t0) / traj.T_s);
  const std::size_t j = std::min(static_cast<std::size_t>(std::floor(u)), traj.inputs.size() - 1);
  return {j, std::min(1.0, u - static_cast<double>(j))};
}
}  // namespace

planner::FrenetState interpolate(const planner::PlannedTrajectory & traj, double t)
{
  const auto [j, f] = locate(traj, t);
  const planner::FrenetState & a = traj.states[j];
  const planner::FrenetState & b = traj.states[j + 1];
  planner::FrenetState x = a + f * (b - a);
  x(2) = a(2) + f * geometry::wrap_angle(b(2) - a(2));
  return x;
}

std::vector<tracker::VehicleState> resample(
  const planner::PlannedTrajectory & traj, const geometry::ReferencePath & path, double t_query,
  int N_P, double T_s, double wheelbase)
{
  if (t_query + N_P * T_s > traj.end_time() + kTimeSlack) {
    throw HorizonExhausted(fmt::format(
      "reference window ending at {:.3f} s exceeds trajectory end {:.3f} s", t_query + N_P * T_s,
      traj.end_time()));
  }
  std::vector<tracker::VehicleState> out;
  out.reserve(static_cast<std::size_t>(N_P) + 1);
  for (int k = 0; k <= N_P; ++k) {
    const double t = t_query + k * T_s;
    const auto [j, f] = locate(traj, t);
    const planner::FrenetState & a = traj.states[j];
    const planner::FrenetState & b = traj.states[j + 1];
    const planner::FrenetState x = interpolate(traj, t);
    const double s = std::clamp(x(0), 0.0, path.length());
    const auto p = geometry::frenet_to_cartesian(path, {s, x(1)});
    const double s_rate = (b(0) - a(0)) / traj.T_s;
    const double heading_rate =
      geometry::wrap_angle(b(2) - a(2)) / traj.T_s + path.curvature(s) * s_rate;
    const double kappa = heading_rate / std::max(x(3), 0.5);
    tracker::VehicleState chi;
    chi << p.x, p.y, geometry::wrap_angle(x(2) + path.heading(s)), x(3), std::atan(wheelbase * kappa);
    out.push_back(chi);
  }
  return out;
}

}  // namespace tvapf::resampler
