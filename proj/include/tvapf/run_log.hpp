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

#ifndef TVAPF__RUN_LOG_HPP_
#define TVAPF__RUN_LOG_HPP_

#include "tvapf/scenario.hpp"
#include "tvapf/simulation.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace tvapf::run_log
{

/// One row per plant step with a fixed column order; wall-clock values are never written.
void write_runlog_csv(const simulation::RunLog & log, const scenario::Scenario & sc, std::ostream & out);

/// Per-instance trajectories, labels, forecasts and solve statistics.
nlohmann::ordered_json instances_json(const simulation::RunLog & log);

struct Summary
{
  double min_speed{0.0};
  double min_speed_time{0.0};
  double max_abs_a_lon{0.0};
  double max_abs_jerk{0.0};
  double max_abs_yaw_rate_deg{0.0};
  double max_abs_delta_deg{0.0};
  double max_abs_a_lat{0.0};
  double min_actor_gap{0.0};
  double max_abs_err_x{0.0};
  double max_abs_err_y{0.0};
  double sigma_zero_fraction{0.0};
  int tracker_ticks{0};
  int tracker_infeasible{0};
  int safe_stops{0};
  int collisions{0};
  /// First instance time with an Overtake label, negative when none.
  double first_overtake{-1.0};
  /// First time after the first overtake with the ego centered in the rightmost lane at the
  /// reference speed, negative when never.
  double return_time{-1.0};
  double solve_mean{0.0};
  double solve_max{0.0};
  int instances{0};
  std::vector<std::pair<double, std::string>> timeline;
  int limit_violations{0};
};

Summary summarize(const simulation::RunLog & log, const scenario::Scenario & sc);

nlohmann::ordered_json summary_json(const Summary & summary, const simulation::RunLog & log);

/// Writes runlog.csv, instances.json and summary.json into dir, creating it when needed.
Summary write_outputs(const simulation::RunLog & log, const scenario::Scenario & sc, const std::string & dir);

}  // namespace tvapf::run_log

#endif  // TVAPF__RUN_LOG_HPP_
