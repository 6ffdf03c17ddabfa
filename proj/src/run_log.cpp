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

#include "tvapf/run_log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace tvapf::run_log
{
namespace
{
using json = nlohmann::ordered_json;
constexpr double kPi = 3.14159265358979323846;

std::string num(double v) { return fmt::format("{:.9g}", v); }

json state_array(const Eigen::VectorXd & v)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

double yaw_rate(const tracker::VehicleState & chi, double L) { return chi(3) * std::tan(chi(4)) / L; }
}  // namespace

void write_runlog_csv(const simulation::RunLog & log, const scenario::Scenario & sc, std::ostream & out)
{
  const geometry::ReferencePath path = scenario::build_path(sc);
  const double L = sc.tracker.wheelbase;
  out << "time,x,y,theta,v,delta,a,a_cmd,w_delta,yaw_rate,a_lat,s,d,trajectory_id,tick,"
         "ref_x,ref_y,ref_theta,ref_v,ref_delta,err_x,err_y,sigma,tracker_status";
  for (const auto & id : log.actor_ids) {
    out << fmt::format(",{0}_s,{0}_d,{0}_v,{0}_x,{0}_y", id);
  }
  out << '\n';
  for (const auto & r : log.steps) {
    const double w = yaw_rate(r.chi, L);
    out << num(r.t) << ',' << num(r.chi(0)) << ',' << num(r.chi(1)) << ',' << num(r.chi(2)) << ','
        << num(r.chi(3)) << ',' << num(r.chi(4)) << ',' << num(r.a) << ',' << num(r.u_cmd(0)) << ','
        << num(r.u_cmd(1)) << ',' << num(w) << ',' << num(r.chi(3) * w) << ',' << num(r.s) << ','
        << num(r.d) << ',' << r.trajectory_id << ',' << (r.tick ? 1 : 0) << ',' << num(r.ref(0)) << ','
        << num(r.ref(1)) << ',' << num(r.ref(2)) << ',' << num(r.ref(3)) << ',' << num(r.ref(4)) << ','
        << num(r.chi(0) - r.ref(0)) << ',' << num(r.chi(1) - r.ref(1)) << ',' << num(r.sigma) << ','
        << static_cast<int>(r.tracker_status);
    for (const auto & a : r.actors) {
      double x = std::nan("");
      double y = std::nan("");
      if (a.s >= 0.0 && a.s <= path.length()) {
        const auto p = geometry::frenet_to_cartesian(path, {a.s, a.d});
        x = p.x;
        y = p.y;
      }
      out << ',' << num(a.s) << ',' << num(a.d) << ',' << num(a.v) << ',' << num(x) << ',' << num(y);
    }
    out << '\n';
  }
}

json instances_json(const simulation::RunLog & log)
{
  json out = json::array();
  for (const auto & inst : log.instances) {
    const auto & tr = inst.trajectory;
    json states = json::array();
    for (const auto & x : tr.states) states.push_back(state_array(x));
    json inputs = json::array();
    for (const auto & u : tr.inputs) inputs.push_back(state_array(u));
    json forecasts = json::array();
    for (const auto & f : inst.forecasts) {
      json steps = json::array();
      for (const auto & st : f.steps) steps.push_back({st.s_center, st.delta_s, st.s_min, st.s_max});
      forecasts.push_back({{"id", f.id}, {"d_o", f.d_o}, {"direction", f.direction}, {"steps", steps}});
    }
    out.push_back({
      {"id", tr.id},
      {"t", inst.t},
      {"published", inst.published},
      {"xi0", state_array(inst.xi0)},
      {"label", planner::to_string(tr.label)},
      {"fallback", tr.fallback},
      {"T_s", tr.T_s},
      {"states", states},
      {"inputs", inputs},
      {"terminal",
       {{"s_max", tr.terminal.s_max}, {"d_center", tr.terminal.d_center}, {"eps_d", tr.terminal.eps_d},
        {"eps_psi", tr.terminal.eps_psi}, {"nu_max", tr.terminal.nu_max},
        {"braking_distance", tr.terminal.braking_distance}, {"leader", tr.terminal.leader_id}}},
      {"stats",
       {{"status", tr.stats.status}, {"start", tr.stats.start}, {"iterations", tr.stats.iterations},
        {"objective", std::isfinite(tr.stats.objective) ? json(tr.stats.objective) : json(nullptr)},
        {"constraint_violation", tr.stats.constraint_violation}, {"wall_time", tr.stats.wall_time},
        {"starts_tried", tr.stats.starts_tried}, {"starts_feasible", tr.stats.starts_feasible}}},
      {"forecasts", forecasts},
    });
  }
  return out;
}

Summary summarize(const simulation::RunLog & log, const scenario::Scenario & sc)
{
  Summary s;
  if (log.steps.empty()) {
    return s;
  }
  const geometry::ReferencePath path = scenario::build_path(sc);
  const double L = sc.tracker.wheelbase;
  const double dt = sc.sim.plant_step;
  const double lane0 = path.lane_center(0);
  const double boundary = path.rightmost_lane_left_boundary();
  const double yaw_max = sc.limits.yaw_rate_max_deg * kPi / 180.0;
  const double steer_max = sc.limits.steer_max_deg * kPi / 180.0;

  for (const auto & inst : log.instances) {
    const auto & tr = inst.trajectory;
    s.timeline.emplace_back(inst.t, planner::to_string(tr.label));
    if (tr.label == planner::Decision::Overtake && s.first_overtake < 0.0) s.first_overtake = inst.t;
    if (tr.fallback) ++s.safe_stops;
    s.solve_mean += tr.stats.wall_time;
    s.solve_max = std::max(s.solve_max, tr.stats.wall_time);
  }
  s.instances = static_cast<int>(log.instances.size());
  if (s.instances > 0) s.solve_mean /= s.instances;

  s.min_actor_gap = std::numeric_limits<double>::infinity();
  double prev_a = log.steps.front().a;
  int sigma_zero = 0;
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const auto & r = log.steps[i];
    const double w = yaw_rate(r.chi, L);
    const double jerk = i == 0 ? 0.0 : (r.a - prev_a) / dt;
    prev_a = r.a;
    s.max_abs_a_lon = std::max(s.max_abs_a_lon, std::abs(r.a));
    s.max_abs_jerk = std::max(s.max_abs_jerk, std::abs(jerk));
    s.max_abs_yaw_rate_deg = std::max(s.max_abs_yaw_rate_deg, std::abs(w) * 180.0 / kPi);
    s.max_abs_delta_deg = std::max(s.max_abs_delta_deg, std::abs(r.chi(4)) * 180.0 / kPi);
    s.max_abs_a_lat = std::max(s.max_abs_a_lat, std::abs(r.chi(3) * w));
    if (std::abs(r.a) > sc.limits.a_max + 1e-9 || std::abs(jerk) > sc.limits.jerk_max + 1e-6 ||
        std::abs(w) > yaw_max + 1e-9 || std::abs(r.chi(4)) > steer_max + 1e-9 || r.chi(3) < 0.0 ||
        r.chi(3) > sc.limits.v_max + 1e-9) {
      ++s.limit_violations;
    }
    if (r.tick) {
      ++s.tracker_ticks;
      s.max_abs_err_x = std::max(s.max_abs_err_x, std::abs(r.chi(0) - r.ref(0)));
      s.max_abs_err_y = std::max(s.max_abs_err_y, std::abs(r.chi(1) - r.ref(1)));
      if (r.sigma <= sc.tracker.sigma_zero) ++sigma_zero;
      if (r.tracker_status != simulation::TrackerStatus::Ok) ++s.tracker_infeasible;
    }
    for (const auto & a : r.actors) {
      if (a.s < 0.0 || a.s > path.length()) continue;
      const auto p = geometry::frenet_to_cartesian(path, {a.s, a.d});
      s.min_actor_gap = std::min(s.min_actor_gap, std::hypot(p.x - r.chi(0), p.y - r.chi(1)));
    }
  }
  s.sigma_zero_fraction = s.tracker_ticks > 0 ? static_cast<double>(sigma_zero) / s.tracker_ticks : 0.0;
  for (const auto & e : log.events) {
    if (e.kind == "collision") ++s.collisions;
  }

  // Speed dip: minimum after the peak reached before the first overtake instance.
  const double dip_end = s.first_overtake >= 0.0 ? s.first_overtake + sc.planner.instance_period : log.steps.back().t;
  std::size_t peak = 0;
  for (std::size_t i = 0; i < log.steps.size() && log.steps[i].t <= dip_end; ++i) {
    if (log.steps[i].chi(3) > log.steps[peak].chi(3)) peak = i;
  }
  s.min_speed = log.steps[peak].chi(3);
  s.min_speed_time = log.steps[peak].t;
  for (std::size_t i = peak; i < log.steps.size() && log.steps[i].t <= dip_end; ++i) {
    if (log.steps[i].chi(3) < s.min_speed) {
      s.min_speed = log.steps[i].chi(3);
      s.min_speed_time = log.steps[i].t;
    }
  }

  if (s.first_overtake >= 0.0) {
    bool crossed = false;
    for (const auto & r : log.steps) {
      if (r.t < s.first_overtake) continue;
      if (!crossed) {
        crossed = r.d > boundary;
        continue;
      }
      const double v_bar = std::min(sc.ego.v_des, path.speed_limit(std::clamp(r.s, 0.0, path.length())));
      if (std::abs(r.d - lane0) <= 0.3 && std::abs(r.chi(3) - v_bar) <= 0.5) {
        s.return_time = r.t;
        break;
      }
    }
  }
  return s;
}

json summary_json(const Summary & s, const simulation::RunLog & log)
{
  json timeline = json::array();
  for (const auto & [t, label] : s.timeline) timeline.push_back({{"t", t}, {"label", label}});
  json events = json::array();
  for (const auto & e : log.events) events.push_back({{"t", e.t}, {"kind", e.kind}, {"detail", e.detail}});
  return {
    {"min_speed", s.min_speed},
    {"min_speed_time", s.min_speed_time},
    {"max_abs_a_lon", s.max_abs_a_lon},
    {"max_abs_jerk", s.max_abs_jerk},
    {"max_abs_yaw_rate_deg", s.max_abs_yaw_rate_deg},
    {"max_abs_delta_deg", s.max_abs_delta_deg},
    {"max_abs_a_lat", s.max_abs_a_lat},
    {"limit_violations", s.limit_violations},
    {"min_actor_gap", s.min_actor_gap},
    {"collisions", s.collisions},
    {"tracking", {{"ticks", s.tracker_ticks}, {"max_abs_err_x", s.max_abs_err_x}, {"max_abs_err_y", s.max_abs_err_y},
                  {"sigma_zero_fraction", s.sigma_zero_fraction}, {"not_ok_ticks", s.tracker_infeasible}}},
    {"decision_timeline", timeline},
    {"first_overtake", s.first_overtake},
    {"return_time", s.return_time},
    {"safe_stops", s.safe_stops},
    {"solve_time", {{"instances", s.instances}, {"mean", s.solve_mean}, {"max", s.solve_max}}},
    {"wall_time", log.wall_time},
    {"events", events},
  };
}

Summary write_outputs(const simulation::RunLog & log, const scenario::Scenario & sc, const std::string & dir)
{
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream csv(fs::path(dir) / "runlog.csv");
    if (!csv) throw std::runtime_error("cannot write " + (fs::path(dir) / "runlog.csv").string());
    write_runlog_csv(log, sc, csv);
  }
  {
    std::ofstream out(fs::path(dir) / "instances.json");
    out << instances_json(log).dump(1) << '\n';
  }
  const Summary s = summarize(log, sc);
  std::ofstream out(fs::path(dir) / "summary.json");
  out << summary_json(s, log).dump(2) << '\n';
  return s;
}

}  // namespace tvapf::run_log
