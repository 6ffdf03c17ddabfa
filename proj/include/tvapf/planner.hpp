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

#ifndef TVAPF__PLANNER_HPP_
#define TVAPF__PLANNER_HPP_

#include "tvapf/geometry.hpp"
#include "tvapf/ltp_problem.hpp"
#include "tvapf/potentials.hpp"
#include "tvapf/prediction.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvapf::planner
{

class EmptyTerminalSet : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class Decision { KeepLane, FollowLeader, Overtake, SafeStop };

std::string to_string(Decision decision);

struct SolveStats
{
  int iterations{0};
  double objective{0.0};
  double wall_time{0.0};
  double constraint_violation{0.0};
  std::string status;
  /// Name of the initialization that produced the published solution.
  std::string start;
  int starts_tried{0};
  int starts_feasible{0};
};

struct PlannedTrajectory
{
  int id{0};
  double t0{0.0};
  double T_s{0.5};
  std::vector<FrenetState> states;
  std::vector<ControlInput> inputs;
  Decision label{Decision::KeepLane};
  bool fallback{false};
  TerminalBox terminal;
  SolveStats stats;

  double end_time() const { return t0 + T_s * static_cast<double>(inputs.size()); }
};

struct PlannerContext
{
  const geometry::ReferencePath * path{nullptr};
  PlannerConfig config;
  potentials::PotentialConfig potentials;
  prediction::TvapfParams tvapf;
};

double braking_distance(double nu_ter, double tau, double alpha_min, double j_max);

/// s_o - max(delta_s, keep_out) - D.
double safe_longitudinal_limit(double s_o, double delta_s, double keep_out, double D);

/// Longitudinal half extent of a forecast's field at step j where it drops to half of epsilon_o
/// on its own lane axis.
double keep_out_distance(const prediction::ForecastStep & step, const prediction::TvapfParams & tvapf);

/// Terminal box for a horizon ending near s_reference in the lane centered at d_center. The
/// leader is the nearest forecast in that lane whose step-N center lies ahead of s_reference.
/// Throws EmptyTerminalSet when the limit falls behind ego_s.
TerminalBox terminal_set(
  const std::vector<prediction::UncertainForecast> & forecasts, const PlannerContext & ctx,
  double ego_s, double d_center, double s_reference);

/// Jerk-limited maximum braking in the current lane, sampled on the planner grid.
PlannedTrajectory safe_stop_trajectory(double t0, const FrenetState & xi0, const PlannerContext & ctx);

/// Continuous-time jerk-limited braking from xi (straight along the lane, constant d) integrated
/// with step dt until standstill. Returns the visited states.
std::vector<FrenetState> braking_rollout(const FrenetState & xi, const TerminalParams & params, double dt);

/// Reference speeds for each step of a trajectory, frozen for one solve.
std::vector<double> reference_speeds(
  const std::vector<FrenetState> & states, const std::vector<ControlInput> & inputs,
  const PlannerContext & ctx);

Decision decision_label(
  const PlannedTrajectory & traj, const std::vector<prediction::UncertainForecast> & forecasts,
  const PlannerContext & ctx);

/// Solves the local trajectory planning problem from several initializations and keeps the
/// cheapest solution that satisfies every constraint. Falls back to the safe-stop trajectory when
/// none does. lambda_prev, when given, is the input applied just before t0; the first planned
/// input then stays within one rate step of it.
PlannedTrajectory solve_ltp(
  double t0, const FrenetState & xi0, const std::vector<prediction::UncertainForecast> & forecasts,
  const PlannerContext & ctx, const PlannedTrajectory * warm_start,
  const ControlInput * lambda_prev = nullptr);

/// Largest violation of dynamics, box, rate, obstacle and terminal constraints.
double constraint_violation(
  const PlannedTrajectory & traj, const FrenetState & xi0,
  const std::vector<prediction::UncertainForecast> & forecasts, const PlannerContext & ctx,
  const ControlInput * lambda_prev = nullptr);

}  // namespace tvapf::planner

#endif  // TVAPF__PLANNER_HPP_
