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

#include "tvapf/planner.hpp"
#include "tvapf/run_log.hpp"
#include "tvapf/scenario.hpp"
#include "tvapf/simulation.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace
{
using json = nlohmann::ordered_json;
using namespace tvapf;

constexpr int kExitInvalid = 2;
constexpr int kExitSafeStop = 3;

struct CommonArgs
{
  std::string scenario;
  double instance_period{-1.0};
  double horizon{-1.0};
};

scenario::Scenario load(const CommonArgs & args)
{
  scenario::Scenario sc = scenario::load_scenario(args.scenario);
  scenario::apply_overrides(sc, args.instance_period, args.horizon);
  return sc;
}

json vec(const Eigen::VectorXd & v)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

int cmd_run(const CommonArgs & args, const std::string & out, bool strict, bool dry_run, bool parallel)
{
  const scenario::Scenario sc = load(args);
  if (dry_run) {
    std::cout << scenario::to_json(sc).dump(2) << '\n';
    return 0;
  }
  simulation::RunOptions options;
  options.parallel_planner = parallel;
  const auto log = simulation::run(sc, options);
  const auto summary = run_log::write_outputs(log, sc, out);
  fmt::print(
    "{} instances, first overtake {:.1f} s, min speed {:.2f} m/s, return {:.1f} s, wall {:.2f} s\n",
    summary.instances, summary.first_overtake, summary.min_speed, summary.return_time, log.wall_time);
  for (const auto & [t, label] : summary.timeline) {
    fmt::print("  {:5.1f} s  {}\n", t, label);
  }
  if (strict && summary.safe_stops > 0) {
    fmt::print(stderr, "run ended with {} SafeStop activations\n", summary.safe_stops);
    return kExitSafeStop;
  }
  return 0;
}

int cmd_plan(const CommonArgs & args, double at, const std::string & out)
{
  const scenario::Scenario sc = load(args);
  const geometry::ReferencePath path = scenario::build_path(sc);
  const auto ctx = scenario::planner_context(sc, path);

  simulation::RunOptions options;
  options.stop_time = at;
  const auto log = simulation::run(sc, options);
  const planner::PlannedTrajectory * warm =
    log.instances.empty() ? nullptr : &log.instances.back().trajectory;
  const auto xi0 = simulation::ego_frenet(path, log.final_chi);
  const auto sensed = simulation::sense(sc, path, log.final_actors, xi0(0));
  const auto forecasts = simulation::predict(sensed, sc.planner);
  const double a_applied = log.steps.empty() ? 0.0 : log.steps.back().a;
  const auto lambda_prev = simulation::planner_input(path, log.final_chi, a_applied, sc.tracker.wheelbase);
  const auto traj = planner::solve_ltp(log.final_t, xi0, forecasts, ctx, warm, &lambda_prev);

  json states = json::array();
  for (const auto & x : traj.states) states.push_back(vec(x));
  json inputs = json::array();
  for (const auto & u : traj.inputs) inputs.push_back(vec(u));

  json s_axis = json::array();
  json d_axis = json::array();
  json j_axis = json::array();
  const double s_lo = std::max(0.0, xi0(0) - 50.0);
  const double s_hi = std::min(path.length(), xi0(0) + 450.0);
  for (double s = s_lo; s <= s_hi + 1e-9; s += 2.5) s_axis.push_back(s);
  for (double d = path.right_edge(); d <= path.left_edge() + 1e-9; d += 0.25) d_axis.push_back(d);
  for (int j = 0; j <= sc.planner.N; j += 5) j_axis.push_back(j);
  json total = json::array();
  json envelope = json::array();
  double peak = 0.0;
  for (const auto & jv : j_axis) {
    const auto j = jv.get<std::size_t>();
    json tj = json::array();
    json ej = json::array();
    for (const auto & sv : s_axis) {
      json trow = json::array();
      json erow = json::array();
      for (const auto & dv : d_axis) {
        const double s = sv.get<double>();
        const double d = dv.get<double>();
        double w_max = 0.0;
        for (const auto & f : forecasts) {
          w_max = std::max(w_max, prediction::tvapf_value(s, d, f, j, ctx.tvapf));
        }
        peak = std::max(peak, w_max);
        trow.push_back(prediction::total_obstacle_field(s, d, forecasts, j, ctx.tvapf));
        erow.push_back(w_max);
      }
      tj.push_back(trow);
      ej.push_back(erow);
    }
    total.push_back(tj);
    envelope.push_back(ej);
  }

  json doc{
    {"t", log.final_t},
    {"xi0", vec(xi0)},
    {"label", planner::to_string(traj.label)},
    {"fallback", traj.fallback},
    {"T_s", traj.T_s},
    {"states", states},
    {"inputs", inputs},
    {"stats", {{"status", traj.stats.status}, {"start", traj.stats.start}, {"iterations", traj.stats.iterations},
               {"wall_time", traj.stats.wall_time}}},
    {"terminal", {{"s_max", traj.terminal.s_max}, {"d_center", traj.terminal.d_center},
                  {"eps_d", traj.terminal.eps_d}, {"eps_psi", traj.terminal.eps_psi},
                  {"nu_max", traj.terminal.nu_max}, {"braking_distance", traj.terminal.braking_distance},
                  {"leader", traj.terminal.leader_id}}},
    {"grid", {{"s", s_axis}, {"d", d_axis}, {"j", j_axis}, {"O", total}, {"W_max", envelope}, {"W_peak", peak}}},
  };
  const std::filesystem::path out_path(out);
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  std::ofstream file(out_path);
  if (!file) {
    fmt::print(stderr, "cannot write {}\n", out);
    return 1;
  }
  file << doc.dump(1) << '\n';
  fmt::print("t = {:.2f} s: {} ({} iterations, {:.3f} s)\n", log.final_t, planner::to_string(traj.label),
             traj.stats.iterations, traj.stats.wall_time);
  return 0;
}
}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Time-varying potential field planner"};
  app.require_subcommand(1);

  CommonArgs run_args;
  std::string out_dir = "out";
  int seed = 0;
  bool strict = false;
  bool dry_run = false;
  bool parallel = false;
  auto * run = app.add_subcommand("run", "Closed-loop simulation of a scenario");
  run->add_option("scenario", run_args.scenario, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Reserved; runs are deterministic");
  run->add_flag("--strict", strict, "Exit 3 when a SafeStop fallback was published");
  run->add_flag("--dry-run", dry_run, "Validate and print the resolved scenario");
  run->add_option("--instance-period", run_args.instance_period, "Planner instance period override (s)");
  run->add_option("--horizon", run_args.horizon, "Planner horizon override (s)");
  run->add_flag("--parallel-planner", parallel, "Solve the planner concurrently with the tracker loop");

  CommonArgs plan_args;
  double at = 0.0;
  std::string plan_out = "plan.json";
  auto * plan = app.add_subcommand("plan", "Single planner instance at a scene time");
  plan->add_option("scenario", plan_args.scenario, "Scenario JSON file")->required();
  plan->add_option("--at", at, "Scene time (s)")->required();
  plan->add_option("--out", plan_out, "Output JSON file");
  plan->add_option("--instance-period", plan_args.instance_period, "Planner instance period override (s)");
  plan->add_option("--horizon", plan_args.horizon, "Planner horizon override (s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (run->parsed()) return cmd_run(run_args, out_dir, strict, dry_run, parallel);
    return cmd_plan(plan_args, at, plan_out);
  } catch (const scenario::ScenarioError & e) {
    for (const auto & d : e.diagnostics()) fmt::print(stderr, "{}\n", d);
    return kExitInvalid;
  }
}
