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

#ifndef TVAPF__SIMULATION_HPP_
#define TVAPF__SIMULATION_HPP_

#include "tvapf/planner.hpp"
#include "tvapf/scenario.hpp"
#include "tvapf/tracker.hpp"

#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace tvapf::simulation
{

struct ActorState
{
  std::string id;
  double s{0.0};
  double d{0.0};
  double v{0.0};
  double a{0.0};
  int direction{1};
};

ActorState initial_actor(const scenario::ActorSpec & spec);

/// Scripted target speed active at time t; the initial speed before the first entry.
double target_speed(const scenario::ActorSpec & spec, double t);

/// Advances an actor by T toward its scripted target speed under its acceleration bounds.
ActorState step_actor(const scenario::ActorSpec & spec, const ActorState & state, double t, double T);

enum class TrackerStatus { Ok = 0, Infeasible = 1, HorizonExhausted = 2 };

struct StepRecord
{
  double t{0.0};
  tracker::VehicleState chi{tracker::VehicleState::Zero()};
  double a{0.0};
  tracker::VehicleInput u_cmd{tracker::VehicleInput::Zero()};
  double s{0.0};
  double d{0.0};
  int trajectory_id{-1};
  bool tick{false};
  tracker::VehicleState ref{tracker::VehicleState::Zero()};
  double sigma{0.0};
  TrackerStatus tracker_status{TrackerStatus::Ok};
  std::vector<ActorState> actors;
};

struct InstanceRecord
{
  double t{0.0};
  planner::FrenetState xi0{planner::FrenetState::Zero()};
  std::vector<prediction::ObstacleState> sensed;
  std::vector<prediction::UncertainForecast> forecasts;
  planner::PlannedTrajectory trajectory;
  /// Scene time at which the trajectory became active.
  double published{0.0};
};

struct Event
{
  double t{0.0};
  std::string kind;
  std::string detail;
};

struct RunLog
{
  std::vector<std::string> actor_ids;
  std::vector<StepRecord> steps;
  std::vector<InstanceRecord> instances;
  std::vector<Event> events;
  double wall_time{0.0};
  double tracker_time{0.0};
  /// Scene state where the run stopped.
  double final_t{0.0};
  tracker::VehicleState final_chi{tracker::VehicleState::Zero()};
  std::vector<ActorState> final_actors;
};

struct RunOptions
{
  /// Solves the planner on a worker thread and publishes it one tracker period later.
  bool parallel_planner{false};
  /// Stops before the plant step at this time when non-negative.
  double stop_time{-1.0};
};

/// Thread-safe single-slot publication of the active trajectory.
class TrajectoryMailbox
{
public:
  void publish(std::shared_ptr<const planner::PlannedTrajectory> traj);
  std::shared_ptr<const planner::PlannedTrajectory> latest() const;

private:
  mutable std::mutex mutex_;
  std::shared_ptr<const planner::PlannedTrajectory> current_;
};

planner::FrenetState ego_frenet(const geometry::ReferencePath & path, const tracker::VehicleState & chi);

/// Applied acceleration and Frenet heading rate of the ego, the planner's view of its current input.
planner::ControlInput planner_input(
  const geometry::ReferencePath & path, const tracker::VehicleState & chi, double a, double wheelbase);

/// Obstacle states of the actors within sensor range of ego_s.
std::vector<prediction::ObstacleState> sense(
  const scenario::Scenario & sc, const geometry::ReferencePath & path,
  const std::vector<ActorState> & actors, double ego_s);

std::vector<prediction::UncertainForecast> predict(
  const std::vector<prediction::ObstacleState> & sensed, const planner::PlannerConfig & config);

RunLog run(const scenario::Scenario & sc, const RunOptions & options = {});

}  // namespace tvapf::simulation

#endif  // TVAPF__SIMULATION_HPP_
