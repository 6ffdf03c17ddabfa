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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

#include "tvapf/geometry.hpp"
#include "tvapf/ltp_problem.hpp"
#include "tvapf/planner.hpp"
#include "tvapf/prediction.hpp"
#include "tvapf/run_log.hpp"
#include "tvapf/scenario.hpp"
#include "tvapf/simulation.hpp"
#include "tvapf/tracker.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace
{
namespace geo = tvapf::geometry;
namespace pl = tvapf::planner;
namespace pred = tvapf::prediction;
namespace sc = tvapf::scenario;
namespace sim = tvapf::simulation;
namespace tr = tvapf::tracker;

constexpr double kPi = 3.14159265358979323846;

int g_failures = 0;

void report(int id, bool pass, const std::string & title, const std::string & detail)
{
  if (!pass) ++g_failures;
  fmt::print("{} criterion {}: {} ({})\n", pass ? "PASS" : "FAIL", id, title, detail);
  std::fflush(stdout);
}

struct ScenarioRun
{
  sc::Scenario scenario;
  sim::RunLog log;
  tvapf::run_log::Summary summary;
  std::string csv;
};

ScenarioRun run_overtake()
{
  ScenarioRun r;
  r.scenario = sc::load_scenario(std::string(TVAPF_SCENARIO_DIR) + "/overtake.json");
  r.log = sim::run(r.scenario);
  r.summary = tvapf::run_log::summarize(r.log, r.scenario);
  std::ostringstream out;
  tvapf::run_log::write_runlog_csv(r.log, r.scenario, out);
  r.csv = out.str();
  return r;
}

std::string label_at(const ScenarioRun & r, double t)
{
  for (const auto & inst : r.log.instances) {
    if (std::abs(inst.t - t) < 1e-9) return pl::to_string(inst.trajectory.label);
  }
  return "missing";
}

void criterion_timeline(const ScenarioRun & r)
{
  const auto & s = r.summary;
  const std::string l20 = label_at(r, 20.0);
  const std::string l25 = label_at(r, 25.0);
  const bool held = l20 != "missing" && l25 != "missing" && l20 != "Overtake" && l25 != "Overtake";
  const bool dip = s.min_speed >= 8.1 && s.min_speed <= 9.1;
  const bool first = s.first_overtake >= 25.0 - 1e-9 && s.first_overtake <= 35.0 + 1e-9;
  const bool back = s.return_time >= 50.0 && s.return_time <= 60.0;
  const bool fast = r.log.wall_time < 60.0;
  report(
    1, held && dip && first && back && fast, "overtake scenario timeline",
    fmt::format(
      "20 s {}, 25 s {}; min speed {:.3f} m/s at {:.2f} s; first Overtake {:.1f} s; back in lane at "
      "{:.2f} s; wall {:.2f} s",
      l20, l25, s.min_speed, s.min_speed_time, s.first_overtake, s.return_time, r.log.wall_time));
}

void criterion_limits(const ScenarioRun & r)
{
  const auto & lim = r.scenario.limits;
  const double L = r.scenario.tracker.wheelbase;
  const double dt = r.scenario.sim.plant_step;
  double a = 0.0;
  double jerk = 0.0;
  double yaw = 0.0;
  double steer = 0.0;
  for (std::size_t i = 0; i < r.log.steps.size(); ++i) {
    const auto & st = r.log.steps[i];
    a = std::max(a, std::abs(st.a));
    if (i > 0) jerk = std::max(jerk, std::abs(st.a - r.log.steps[i - 1].a) / dt);
    yaw = std::max(yaw, std::abs(st.chi(3) * std::tan(st.chi(4)) / L) * 180.0 / kPi);
    steer = std::max(steer, std::abs(st.chi(4)) * 180.0 / kPi);
  }
  const double tol = 1e-9;
  const bool ok = a <= lim.a_max + tol && jerk <= lim.jerk_max + tol && yaw <= lim.yaw_rate_max_deg + tol &&
                  steer <= lim.steer_max_deg + tol && r.summary.limit_violations == 0;
  report(
    2, ok, "comfort limits",
    fmt::format(
      "max |a| {:.4f}, max |jerk| {:.6f}, max |yaw rate| {:.3f} deg/s, max |delta| {:.3f} deg, {} logged "
      "violations",
      a, jerk, yaw, steer, r.summary.limit_violations));
}

void criterion_solve_time(const ScenarioRun & r)
{
  const auto & s = r.summary;
  const bool ok = s.instances > 0 && s.solve_mean < 0.5 && s.solve_max < 2.0 &&
                  s.solve_max < r.scenario.planner.instance_period;
  report(
    3, ok, "planner solve time",
    fmt::format("{} solves, mean {:.3f} s, max {:.3f} s", s.instances, s.solve_mean, s.solve_max));
}

// Admissible rollout of the obstacle model with one sampled acceleration per step.
std::vector<double> sampled_rollout(const pred::ObstacleState & o, double T, int N, std::mt19937_64 & rng)
{
  std::uniform_real_distribution<double> accel(o.a_bounds.min, o.a_bounds.max);
  std::bernoulli_distribution extreme(0.2);
  std::vector<double> s{o.s_o};
  double pos = o.s_o;
  double v = o.v_o;
  for (int j = 0; j < N; ++j) {
    pos += o.direction * T * v;
    double a = accel(rng);
    if (extreme(rng)) a = a < 0.5 * (o.a_bounds.min + o.a_bounds.max) ? o.a_bounds.min : o.a_bounds.max;
    v = std::clamp(v + T * a, o.v_bounds.min, o.v_bounds.max);
    s.push_back(pos);
  }
  return s;
}

void criterion_reachable_set(const ScenarioRun & r)
{
  const double T = r.scenario.planner.T_s;
  const int N = r.scenario.planner.N;
  std::vector<pred::ObstacleState> obstacles;
  for (const auto & spec : r.scenario.actors) {
    const auto a = sim::initial_actor(spec);
    pred::ObstacleState o;
    o.id = a.id;
    o.s_o = a.s;
    o.d_o = a.d;
    o.v_o = a.v;
    o.direction = a.direction;
    o.v_bounds = spec.v_bounds;
    o.a_bounds = spec.a_bounds;
    obstacles.push_back(o);
  }
  pred::ObstacleState table;
  table.id = "table";
  table.s_o = 300.0;
  table.v_o = 3.0;
  table.v_bounds = {0.0, r.scenario.limits.v_max};
  table.a_bounds = {-r.scenario.limits.a_max, r.scenario.limits.a_max};
  obstacles.push_back(table);

  std::mt19937_64 rng(20240601);
  long escapes = 0;
  for (const auto & o : obstacles) {
    const auto f = pred::propagate_obstacle(o, T, N);
    for (int k = 0; k < 10000; ++k) {
      const auto s = sampled_rollout(o, T, N, rng);
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] < f.steps[j].s_min || s[j] > f.steps[j].s_max) ++escapes;
      }
    }
  }
  const auto f = pred::propagate_obstacle(table, T, N);
  const double expected = T * T * (table.a_bounds.max - table.a_bounds.min);
  const double spread_err = std::abs(f.steps[2].delta_s - expected);
  report(
    4, escapes == 0 && spread_err <= 1e-12, "reachable-set enclosure",
    fmt::format(
      "{} obstacles x 10000 rollouts, {} escapes; two-step spread {:.15f} m vs {:.15f} m", obstacles.size(),
      escapes, f.steps[2].delta_s, expected));
}

geo::ReferencePath make_path(const std::vector<geo::CartesianPoint> & pts)
{
  return geo::ReferencePath(pts, 2, 4.0, {{0.0, 12.5}});
}

void criterion_geometry()
{
  const double R = 60.0;
  std::vector<geo::CartesianPoint> straight;
  std::vector<geo::CartesianPoint> circle;
  std::vector<geo::CartesianPoint> wavy;
  for (int i = 0; i <= 60; ++i) straight.push_back({10.0 * i, 5.0});
  for (int i = 0; i <= 240; ++i) {
    const double t = 1.5 * kPi * i / 240;
    circle.push_back({R * std::cos(t), R * std::sin(t)});
  }
  for (int i = 0; i <= 120; ++i) {
    const double x = 2.5 * i;
    wavy.push_back({x, 6.0 * std::sin(x / 35.0) + 0.002 * x * x});
  }
  std::mt19937_64 rng(99);
  double worst = 0.0;
  double oracle = 0.0;
  int index = 0;
  for (const auto * pts : {&straight, &circle, &wavy}) {
    const auto path = make_path(*pts);
    std::uniform_real_distribution<double> s_dist(0.5, path.length() - 0.5);
    std::uniform_real_distribution<double> d_dist(path.right_edge(), path.left_edge());
    for (int i = 0; i < 1000; ++i) {
      const geo::FrenetPoint q{s_dist(rng), d_dist(rng)};
      const auto p = geo::frenet_to_cartesian(path, q);
      const auto f = geo::cartesian_to_frenet(path, p);
      const auto back = geo::frenet_to_cartesian(path, f);
      worst = std::max(worst, std::hypot(back.x - p.x, back.y - p.y));
      if (index == 1) {
        // Left of a counter-clockwise circle points at its center.
        oracle = std::max(oracle, std::abs(std::hypot(p.x, p.y) - (R - q.d)));
        oracle = std::max(oracle, std::abs(f.d - (R - std::hypot(p.x, p.y))));
      }
    }
    ++index;
  }
  report(
    5, worst < 1e-6 && oracle < 1e-6, "Frenet round trip",
    fmt::format("3 paths x 1000 points, max round-trip error {:.3e} m, circle closed-form error {:.3e} m", worst, oracle));
}

void criterion_safe_stop(const ScenarioRun & r)
{
  sc::Scenario base = r.scenario;
  base.actors.clear();
  const auto path = sc::build_path(base);
  const auto ctx = sc::planner_context(base, path);
  const auto & tp = ctx.config.terminal;
  const double D = pl::braking_distance(tp.nu_ter, tp.tau, tp.alpha_min, tp.j_max);
  const double lane0 = path.lane_center(0);
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int samples = 0;
  int failures = 0;
  int attempts = 0;
  while (samples < 500 && attempts < 5000) {
    ++attempts;
    std::vector<pred::UncertainForecast> forecasts;
    const int count = 1 + static_cast<int>(3 * u01(rng));
    for (int k = 0; k < count; ++k) {
      pred::ObstacleState o;
      o.id = fmt::format("A{}", k);
      o.direction = u01(rng) < 0.3 ? -1 : 1;
      o.d_o = o.direction > 0 ? lane0 : -lane0;
      if (u01(rng) < 0.2) o.d_o = lane0;
      o.s_o = 80.0 + 600.0 * u01(rng);
      o.v_o = 12.5 * u01(rng);
      const double dv = 3.0 * u01(rng);
      o.v_bounds = {std::max(0.0, o.v_o - dv), std::min(12.5, o.v_o + dv)};
      const double da = 0.9 * u01(rng);
      o.a_bounds = {-da, da};
      forecasts.push_back(pred::propagate_obstacle(o, ctx.config.T_s, ctx.config.N));
    }
    pl::TerminalBox box;
    try {
      box = pl::terminal_set(forecasts, ctx, 0.0, lane0, 0.0);
    } catch (const pl::EmptyTerminalSet &) {
      continue;
    }
    ++samples;
    pl::FrenetState x;
    x << box.s_max * u01(rng), lane0 + box.eps_d * (2.0 * u01(rng) - 1.0), box.eps_psi * (2.0 * u01(rng) - 1.0),
      box.nu_max * u01(rng);
    const auto roll = pl::braking_rollout(x, tp, 0.01);
    bool ok = roll.back()(0) <= box.s_max + D + 1e-9;
    const std::size_t j = static_cast<std::size_t>(ctx.config.N);
    for (const auto & st : roll) {
      ok = ok && pred::total_obstacle_field(st(0), st(1), forecasts, j, ctx.tvapf) <= ctx.tvapf.epsilon_o;
    }
    failures += ok ? 0 : 1;
  }
  report(
    6, samples == 500 && failures == 0, "terminal-set braking",
    fmt::format("{} terminal states from randomized scenes, {} failures", samples, failures));
}

struct DerivativeCheck
{
  double worst{0.0};
  long entries{0};
};

// Relative central-difference error of the gradient and both constraint Jacobians at z.
template <typename Problem>
void check_derivatives(const Problem & p, const Eigen::VectorXd & z, DerivativeCheck & out)
{
  const int n = static_cast<int>(z.size());
  Eigen::VectorXd g;
  p.gradient(z, g);
  tvapf::solver::SparseMatrix Je;
  tvapf::solver::SparseMatrix Ji;
  p.equality_jacobian(z, Je);
  p.inequality_jacobian(z, Ji);
  const Eigen::MatrixXd Jed(Je);
  const Eigen::MatrixXd Jid(Ji);
  Eigen::VectorXd zp = z;
  Eigen::VectorXd zm = z;
  Eigen::VectorXd cp;
  Eigen::VectorXd cm;
  const auto rel = [&out](double analytic, double numeric) {
    out.worst = std::max(out.worst, std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric)));
    ++out.entries;
  };
  for (int k = 0; k < n; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(z(k)));
    zp(k) = z(k) + h;
    zm(k) = z(k) - h;
    rel(g(k), (p.objective(zp) - p.objective(zm)) / (2 * h));
    p.equalities(zp, cp);
    p.equalities(zm, cm);
    for (int r = 0; r < cp.size(); ++r) rel(Jed(r, k), (cp(r) - cm(r)) / (2 * h));
    p.inequalities(zp, cp);
    p.inequalities(zm, cm);
    for (int r = 0; r < cp.size(); ++r) rel(Jid(r, k), (cp(r) - cm(r)) / (2 * h));
    zp(k) = z(k);
    zm(k) = z(k);
  }
}

void criterion_derivatives(const ScenarioRun & r)
{
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DerivativeCheck ltp;
  DerivativeCheck nmpc;

  // Planner points: dynamically consistent rollouts under random admissible inputs near traffic.
  const auto path = sc::build_path(r.scenario);
  const auto ctx = sc::planner_context(r.scenario, path);
  const auto & cfg = ctx.config;
  for (int point = 0; point < 100; ++point) {
    pred::ObstacleState leader;
    leader.id = "L";
    leader.s_o = 80.0 + 40.0 * u(rng);
    leader.d_o = -2.0;
    leader.v_o = 6.0 + 2.0 * u(rng);
    leader.v_bounds = {3.0, 9.0};
    leader.a_bounds = {-0.5, 0.5};
    pred::ObstacleState oncoming;
    oncoming.id = "O";
    oncoming.s_o = 300.0 + 100.0 * u(rng);
    oncoming.d_o = 2.0;
    oncoming.v_o = 8.0;
    oncoming.direction = -1;
    oncoming.v_bounds = {6.0, 10.0};
    oncoming.a_bounds = {-0.9, 0.9};
    std::vector<pred::UncertainForecast> forecasts{
      pred::propagate_obstacle(leader, cfg.T_s, cfg.N), pred::propagate_obstacle(oncoming, cfg.T_s, cfg.N)};
    const pl::FrenetState xi0(20.0 + 10.0 * u(rng), -2.0 + 0.5 * u(rng), 0.05 * u(rng), 8.0 + 2.0 * u(rng));
    const pl::TerminalBox box{700.0, -2.0, 0.3, 0.05, 8.0, 47.6, ""};
    std::vector<double> v_bar(static_cast<std::size_t>(cfg.N) + 1, 12.0);
    pl::LtpProblem problem(path, xi0, forecasts, ctx.tvapf, ctx.potentials, cfg, v_bar, box);
    std::vector<pl::FrenetState> states{xi0};
    std::vector<pl::ControlInput> inputs;
    for (int j = 0; j < cfg.N; ++j) {
      pl::ControlInput in(0.8 * u(rng), 0.05 * u(rng));
      const auto & x = states.back();
      if (x(3) < 2.0) in(0) = std::abs(in(0));
      if (std::abs(x(2)) > 0.2) in(1) = -0.05 * std::copysign(1.0, x(2));
      if (std::abs(x(1)) > 2.5) in(1) = -0.05 * std::copysign(1.0, x(1));
      inputs.push_back(in);
      states.push_back(pl::discretize_dynamics(x, in, cfg.T_s));
    }
    check_derivatives(problem, problem.pack(states, inputs), ltp);
  }

  // Tracker points: rollouts of the bicycle model against a feasible reference.
  const tr::TrackerConfig tcfg = r.scenario.tracker;
  for (int point = 0; point < 100; ++point) {
    tr::VehicleState start;
    start << 100.0 * u(rng), 10.0 * u(rng), 0.5 * u(rng), 6.0 + 4.0 * u(rng), 0.05 * u(rng);
    std::vector<tr::VehicleState> ref{start};
    const tr::VehicleInput ref_u(0.5 * u(rng), 0.02 * u(rng));
    for (int k = 0; k < tcfg.N; ++k) ref.push_back(tr::bicycle_step(ref.back(), ref_u, tcfg.T_s, tcfg.wheelbase));
    tr::VehicleState chi0 = start;
    chi0(0) += 0.2 * u(rng);
    chi0(1) += 0.2 * u(rng);
    tr::NmpcProblem problem(tcfg, chi0, ref, {0.1 * u(rng), 0.01 * u(rng)});
    Eigen::VectorXd z = Eigen::VectorXd::Zero(problem.nlp().n_vars);
    tr::VehicleState x = chi0;
    for (int k = 0; k <= tcfg.N; ++k) {
      z.segment<5>(tr::NmpcProblem::state_offset(k)) = x;
      if (k < tcfg.N) {
        const tr::VehicleInput in(ref_u(0) + 0.2 * u(rng), ref_u(1) + 0.02 * u(rng));
        z.segment<2>(tr::NmpcProblem::input_offset(k)) = in;
        x = tr::bicycle_step(x, in, tcfg.T_s, tcfg.wheelbase);
      }
    }
    z(problem.sigma_offset()) = (x - ref.back()).squaredNorm() + 0.1 * std::abs(u(rng));
    check_derivatives(problem, z, nmpc);
  }
  report(
    7, ltp.worst <= 1e-5 && nmpc.worst <= 1e-5, "derivatives vs central differences",
    fmt::format(
      "planner 100 points, {} entries, max rel error {:.2e}; tracker 100 points, {} entries, max rel error "
      "{:.2e}",
      ltp.entries, ltp.worst, nmpc.entries, nmpc.worst));
}

void criterion_tracking(const ScenarioRun & r)
{
  const auto & e = r.scenario.tracker.e_bounds;
  int ticks = 0;
  int outside = 0;
  int zero = 0;
  double worst = 0.0;
  for (const auto & st : r.log.steps) {
    if (!st.tick) continue;
    ++ticks;
    const double ex = std::abs(st.chi(0) - st.ref(0));
    const double ey = std::abs(st.chi(1) - st.ref(1));
    worst = std::max({worst, ex, ey});
    if (ex > e(0) || ey > e(1)) ++outside;
    if (st.sigma <= r.scenario.tracker.sigma_zero) ++zero;
  }
  const double fraction = ticks > 0 ? static_cast<double>(zero) / ticks : 0.0;
  report(
    8, ticks > 0 && outside == 0 && fraction >= 0.95, "tracking error contract",
    fmt::format(
      "{} ticks, max position error {:.4f} m, {} outside the error box, zero slack on {:.1f}% of ticks", ticks,
      worst, outside, 100.0 * fraction));
}

void criterion_determinism(const ScenarioRun & first)
{
  const ScenarioRun second = run_overtake();
  report(
    9, first.csv == second.csv, "determinism",
    fmt::format("runlog sizes {} and {} bytes, {}", first.csv.size(), second.csv.size(),
                first.csv == second.csv ? "identical" : "different"));
}
}  // namespace

int main()
{
  try {
    const ScenarioRun run = run_overtake();
    criterion_timeline(run);
    criterion_limits(run);
    criterion_solve_time(run);
    criterion_reachable_set(run);
    criterion_geometry();
    criterion_safe_stop(run);
    criterion_derivatives(run);
    criterion_tracking(run);
    criterion_determinism(run);
  } catch (const std::exception & e) {
    fmt::print("FAIL acceptance aborted: {}\n", e.what());
    return 1;
  }
  fmt::print("{} of 9 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
