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

#ifndef TVAPF__SCENARIO_HPP_
#define TVAPF__SCENARIO_HPP_

#include "tvapf/geometry.hpp"
#include "tvapf/planner.hpp"
#include "tvapf/potentials.hpp"
#include "tvapf/prediction.hpp"
#include "tvapf/tracker.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace tvapf::scenario
{

/// Parse or validation failure with one human-readable message per problem.
class ScenarioError : public std::runtime_error
{
public:
  explicit ScenarioError(std::vector<std::string> diagnostics);
  const std::vector<std::string> & diagnostics() const { return diagnostics_; }

private:
  std::vector<std::string> diagnostics_;
};

struct PathSpec
{
  std::vector<geometry::CartesianPoint> points;
  double lane_width{4.0};
  int lane_count{2};
  std::vector<geometry::SpeedLimitSegment> speed_limits{{0.0, 12.5}};
};

struct EgoSpec
{
  double x0{0.0};
  double y0{0.0};
  double theta0{0.0};
  double v0{0.0};
  double v_des{12.0};
};

struct ScriptPoint
{
  double t{0.0};
  double target_v{0.0};
};

struct ActorSpec
{
  std::string id;
  double s0{0.0};
  double d0{0.0};
  double v0{0.0};
  /// +1 travels toward increasing s, -1 is oncoming.
  int direction{1};
  std::vector<ScriptPoint> script;
  prediction::Interval v_bounds{0.0, 12.5};
  prediction::Interval a_bounds{-0.9, 0.9};
};

/// Global vehicle limits shared by the ego and every actor.
struct Limits
{
  double v_max{12.5};
  double a_max{0.9};
  double jerk_max{0.9};
  double yaw_rate_max_deg{4.44};
  double steer_max_deg{24.5};
};

struct SimSpec
{
  double duration{60.0};
  double plant_step{0.02};
  double sensor_range{300.0};
  double footprint_margin{2.0};
};

struct Scenario
{
  PathSpec path;
  EgoSpec ego;
  std::vector<ActorSpec> actors;
  Limits limits;
  prediction::TvapfParams tvapf;
  potentials::PotentialConfig potentials;
  planner::PlannerConfig planner;
  tracker::TrackerConfig tracker;
  SimSpec sim;
};

/// Parses scenario JSON. Diagnostics carry the source name and line of the offending key.
Scenario parse_scenario(const std::string & text, const std::string & source = "<scenario>");
Scenario load_scenario(const std::string & file);

nlohmann::ordered_json to_json(const Scenario & scenario);

/// Throws ScenarioError listing every violated rule.
void validate(const Scenario & scenario);

/// Sets the planner instance period and, when horizon > 0, the planner step count.
void apply_overrides(Scenario & scenario, double instance_period, double horizon);

geometry::ReferencePath build_path(const Scenario & scenario);

/// Planner context bound to path, which must outlive it.
planner::PlannerContext planner_context(const Scenario & scenario, const geometry::ReferencePath & path);

}  // namespace tvapf::scenario

#endif  // TVAPF__SCENARIO_HPP_
