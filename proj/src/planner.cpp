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

#include "tvapf/sqp_solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

namespace tvapf::planner
{
namespace
{
using Clock = std::chrono::steady_clock;

struct Guess
{
  std::string name;
  std::vector<FrenetState> states;
  std::vector<ControlInput> inputs;
};

double clamp(double v, const Interval & i) { return std::min(std::max(v, i.min), i.max); }

const geometry::ReferencePath & path_of(const PlannerContext & ctx)
{
  if (ctx.path == nullptr) {
    throw std::invalid_argument("planner context has no reference path");
  }
  return *ctx.path;
}

// Nearest same-direction actor ahead of ego_s in the rightmost lane.
const prediction::UncertainForecast * right_lane_leader(
  const std::vector<prediction::UncertainForecast> & forecasts, const PlannerContext & ctx,
  double ego_s)
{
  const auto & path = path_of(ctx);
  const double lane = path.lane_center(0);
  const prediction::UncertainForecast * best = nullptr;
  for (const auto & f : forecasts) {
    if (f.direction < 0 || std::abs(f.d_o - lane) >= 0.5 * path.lane_width()) continue;
    if (f.steps.front().s_center <= ego_s) continue;
    if (best == nullptr || f.steps.front().s_center < best->steps.front().s_center) best = &f;
  }
  return best;
}

// Keep-out half extent at the constraint level itself.
double constraint_keep_out(const prediction::ForecastStep & step, const prediction::TvapfParams & tvapf)
{
  const auto scales = prediction::calibrated_scales(step, tvapf);
  return prediction::level_half_width(scales.gamma_s, tvapf.epsilon_o, tvapf.c);
}

// Closed-loop rollout of simple lateral and speed feedback laws that respects every input box and
// rate limit of the planner.
Guess feedback_rollout(
  std::string name, const FrenetState & xi0, const PlannerContext & ctx,
  const std::function<double(int, const FrenetState &)> & target_d,
  const std::function<double(int, const FrenetState &)> & target_v, const ControlInput & lambda_prev)
{
  const PlannerConfig & cfg = ctx.config;
  Guess g{std::move(name), {xi0}, {}};
  double alpha_prev = lambda_prev(0);
  double omega_prev = lambda_prev(1);
  for (int j = 0; j < cfg.N; ++j) {
    const FrenetState & x = g.states.back();
    const double psi_des = std::clamp(-0.04 * (x(1) - target_d(j, x)), -0.12, 0.12);
    double omega = clamp(1.0 * (psi_des - x(2)), cfg.omega_bounds);
    omega = std::clamp(omega, omega_prev + cfg.d_omega_bounds.min, omega_prev + cfg.d_omega_bounds.max);
    double alpha = clamp(0.6 * (target_v(j, x) - x(3)), cfg.alpha_bounds);
    alpha = std::clamp(alpha, alpha_prev + cfg.d_alpha_bounds.min, alpha_prev + cfg.d_alpha_bounds.max);
    alpha = std::max(alpha, -x(3) / cfg.T_s);
    g.inputs.emplace_back(alpha, omega);
    g.states.push_back(discretize_dynamics(x, g.inputs.back(), cfg.T_s));
    g.states.back()(3) = std::max(g.states.back()(3), 0.0);
    alpha_prev = alpha;
    omega_prev = omega;
  }
  return g;
}

Guess follow_guess(
  const FrenetState & xi0, const std::vector<prediction::UncertainForecast> & forecasts,
  const PlannerContext & ctx, const ControlInput & lambda_prev)
{
  const auto & path = path_of(ctx);
  const double lane = path.lane_center(0);
  const auto * leader = right_lane_leader(forecasts, ctx, xi0(0));
  double s_terminal = path.length();
  try {
    s_terminal = terminal_set(forecasts, ctx, xi0(0), lane, xi0(0)).s_max;
  } catch (const EmptyTerminalSet &) {
    s_terminal = xi0(0);
  }
  const double v_des = ctx.potentials.v_des;
  const double decel = 0.5 * std::abs(ctx.config.terminal.alpha_min);
  return feedback_rollout(
    "follow", xi0, ctx, [lane](int, const FrenetState &) { return lane; },
    [&](int j, const FrenetState & x) {
      double limit = s_terminal;
      if (leader != nullptr) {
        const auto & step = leader->steps[static_cast<std::size_t>(j + 1)];
        limit = std::min(limit, step.s_center - 1.05 * constraint_keep_out(step, ctx.tvapf));
      }
      const double gap = std::max(0.0, limit - x(0));
      return std::min(v_des, std::sqrt(2.0 * decel * gap));
    },
    lambda_prev);
}

Guess overtake_guess(
  const FrenetState & xi0, const prediction::UncertainForecast & leader, const PlannerContext & ctx,
  const ControlInput & lambda_prev)
{
  const auto & path = path_of(ctx);
  const double right = path.lane_center(0);
  const double left = path.lane_center(std::min(1, path.lane_count() - 1));
  const double v_des = ctx.potentials.v_des;
  return feedback_rollout(
    "overtake", xi0, ctx,
    [&](int j, const FrenetState & x) {
      const auto & step = leader.steps[static_cast<std::size_t>(j + 1)];
      const double clear = step.s_center + constraint_keep_out(step, ctx.tvapf) + 5.0;
      return x(0) < clear ? left : right;
    },
    [v_des](int, const FrenetState &) { return v_des; }, lambda_prev);
}

Guess shifted_guess(const PlannedTrajectory & warm, double t0, const FrenetState & xi0, const PlannerContext & ctx)
{
  const PlannerConfig & cfg = ctx.config;
  const int shift = static_cast<int>(std::lround((t0 - warm.t0) / cfg.T_s));
  Guess g{"warm", {}, {}};
  if (shift < 0 || shift >= static_cast<int>(warm.inputs.size())) {
    return g;
  }
  for (int j = 0; j <= cfg.N; ++j) {
    const int k = j + shift;
    if (k < static_cast<int>(warm.states.size())) {
      g.states.push_back(warm.states[static_cast<std::size_t>(k)]);
    } else {
      const FrenetState & last = g.states.back();
      g.states.push_back(discretize_dynamics(last, ControlInput::Zero(), cfg.T_s));
    }
    if (j < cfg.N) {
      g.inputs.push_back(
        k < static_cast<int>(warm.inputs.size()) ? warm.inputs[static_cast<std::size_t>(k)]
                                                 : ControlInput::Zero());
    }
  }
  g.states.front() = xi0;
  return g;
}

double box_violation(double v, double lo, double hi) { return std::max({0.0, lo - v, v - hi}); }

// Admissible first input given the input applied just before the horizon starts.
std::pair<ControlInput, ControlInput> first_input_box(const PlannerConfig & cfg, const ControlInput * lambda_prev)
{
  ControlInput lo(cfg.alpha_bounds.min, cfg.omega_bounds.min);
  ControlInput hi(cfg.alpha_bounds.max, cfg.omega_bounds.max);
  if (lambda_prev != nullptr) {
    const ControlInput prev((*lambda_prev)(0), (*lambda_prev)(1));
    const ControlInput p(clamp(prev(0), cfg.alpha_bounds), clamp(prev(1), cfg.omega_bounds));
    lo = lo.cwiseMax(p + ControlInput(cfg.d_alpha_bounds.min, cfg.d_omega_bounds.min));
    hi = hi.cwiseMin(p + ControlInput(cfg.d_alpha_bounds.max, cfg.d_omega_bounds.max));
  }
  return {lo, hi};
}
}  // namespace

std::string to_string(Decision decision)
{
  switch (decision) {
    case Decision::KeepLane:
      return "KeepLane";
    case Decision::FollowLeader:
      return "FollowLeader";
    case Decision::Overtake:
      return "Overtake";
    case Decision::SafeStop:
      return "SafeStop";
  }
  return "Unknown";
}

double braking_distance(double nu_ter, double tau, double alpha_min, double j_max)
{
  if (!(alpha_min < 0.0) || !(j_max > 0.0) || tau < 0.0) {
    throw std::invalid_argument("braking_distance needs alpha_min < 0, j_max > 0, tau >= 0");
  }
  const double a = std::abs(alpha_min);
  return nu_ter * (tau + a / j_max + nu_ter / (2.0 * a));
}

double safe_longitudinal_limit(double s_o, double delta_s, double keep_out, double D)
{
  return s_o - std::max(delta_s, keep_out) - D;
}

double keep_out_distance(const prediction::ForecastStep & step, const prediction::TvapfParams & tvapf)
{
  const auto scales = prediction::calibrated_scales(step, tvapf);
  return prediction::level_half_width(scales.gamma_s, 0.5 * tvapf.epsilon_o, tvapf.c);
}

TerminalBox terminal_set(
  const std::vector<prediction::UncertainForecast> & forecasts, const PlannerContext & ctx,
  double ego_s, double d_center, double s_reference)
{
  const auto & path = path_of(ctx);
  const PlannerConfig & cfg = ctx.config;
  const TerminalParams & tp = cfg.terminal;
  TerminalBox box;
  box.d_center = d_center;
  box.eps_d = tp.eps_d;
  box.eps_psi = tp.eps_psi;
  box.nu_max = tp.nu_ter;
  box.braking_distance = braking_distance(tp.nu_ter, tp.tau, tp.alpha_min, tp.j_max);
  box.s_max = path.length() - box.braking_distance;

  const std::size_t n = static_cast<std::size_t>(cfg.N);
  const prediction::UncertainForecast * leader = nullptr;
  for (const auto & f : forecasts) {
    if (f.steps.size() <= n) {
      throw std::invalid_argument(fmt::format("forecast {} does not cover the horizon", f.id));
    }
    if (std::abs(f.d_o - d_center) >= 0.5 * path.lane_width()) continue;
    if (f.steps[n].s_center <= s_reference) continue;
    if (leader == nullptr || f.steps[n].s_center < leader->steps[n].s_center) leader = &f;
  }
  if (leader != nullptr) {
    const auto & step = leader->steps[n];
    box.s_max = std::min(
      box.s_max, safe_longitudinal_limit(
                   step.s_center, step.delta_s, keep_out_distance(step, ctx.tvapf), box.braking_distance));
    box.leader_id = leader->id;
  }
  if (box.s_max < ego_s) {
    throw EmptyTerminalSet(
      fmt::format("terminal limit {:.3f} m lies behind the ego at {:.3f} m", box.s_max, ego_s));
  }
  return box;
}

std::vector<FrenetState> braking_rollout(const FrenetState & xi, const TerminalParams & params, double dt)
{
  std::vector<FrenetState> out{xi};
  FrenetState x = xi;
  double t = 0.0;
  double alpha = 0.0;
  while (x(3) > 0.0) {
    if (t >= params.tau) {
      alpha = std::max(alpha - params.j_max * dt, params.alpha_min);
    }
    const double v_next = std::max(0.0, x(3) + alpha * dt);
    x(0) += 0.5 * (x(3) + v_next) * dt;
    x(3) = v_next;
    t += dt;
    out.push_back(x);
  }
  return out;
}

PlannedTrajectory safe_stop_trajectory(double t0, const FrenetState & xi0, const PlannerContext & ctx)
{
  const PlannerConfig & cfg = ctx.config;
  PlannedTrajectory traj;
  traj.t0 = t0;
  traj.T_s = cfg.T_s;
  traj.states.push_back(xi0);
  double alpha = 0.0;
  for (int j = 0; j < cfg.N; ++j) {
    const FrenetState & x = traj.states.back();
    alpha = std::max(alpha - cfg.terminal.j_max * cfg.T_s, cfg.alpha_bounds.min);
    alpha = std::max(alpha, -x(3) / cfg.T_s);
    const double omega = clamp(-x(2) / cfg.T_s, cfg.omega_bounds);
    traj.inputs.emplace_back(alpha, omega);
    FrenetState next = discretize_dynamics(x, traj.inputs.back(), cfg.T_s);
    next(3) = std::max(next(3), 0.0);
    traj.states.push_back(next);
  }
  traj.label = Decision::SafeStop;
  traj.fallback = true;
  traj.stats.status = "SafeStop";
  traj.stats.start = "fallback";
  return traj;
}

std::vector<double> reference_speeds(
  const std::vector<FrenetState> & states, const std::vector<ControlInput> & inputs,
  const PlannerContext & ctx)
{
  const auto & path = path_of(ctx);
  std::vector<double> v_bar;
  v_bar.reserve(states.size());
  for (std::size_t j = 0; j < states.size(); ++j) {
    const double s = std::clamp(states[j](0), 0.0, path.length());
    const double omega = inputs.empty() ? 0.0 : inputs[std::min(j, inputs.size() - 1)](1);
    const double kappa = path.curvature(s) + omega / std::max(states[j](3), 1.0);
    v_bar.push_back(potentials::effective_speed(
      ctx.potentials.v_des, path.speed_limit(s), kappa, ctx.potentials.a_l_max));
  }
  return v_bar;
}

Decision decision_label(
  const PlannedTrajectory & traj, const std::vector<prediction::UncertainForecast> & forecasts,
  const PlannerContext & ctx)
{
  if (traj.fallback) {
    return Decision::SafeStop;
  }
  const auto & path = path_of(ctx);
  const double boundary = path.rightmost_lane_left_boundary();
  for (const auto & x : traj.states) {
    if (x(1) > boundary) {
      return Decision::Overtake;
    }
  }
  const auto * leader = right_lane_leader(forecasts, ctx, traj.states.front()(0));
  if (leader == nullptr) {
    return Decision::KeepLane;
  }
  const std::vector<double> v_bar = reference_speeds(traj.states, traj.inputs, ctx);
  double cruise = traj.states.front()(0);
  for (std::size_t j = 0; j + 1 < v_bar.size(); ++j) {
    cruise += v_bar[j] * traj.T_s;
  }
  const std::size_t n = std::min(leader->steps.size(), traj.states.size()) - 1;
  const auto & step = leader->steps[n];
  return cruise >= step.s_center - keep_out_distance(step, ctx.tvapf) ? Decision::FollowLeader
                                                                     : Decision::KeepLane;
}

double constraint_violation(
  const PlannedTrajectory & traj, const FrenetState & xi0,
  const std::vector<prediction::UncertainForecast> & forecasts, const PlannerContext & ctx,
  const ControlInput * lambda_prev)
{
  const auto & path = path_of(ctx);
  const PlannerConfig & cfg = ctx.config;
  const int N = static_cast<int>(traj.inputs.size());
  double worst = (traj.states.front() - xi0).cwiseAbs().maxCoeff();
  if (N > 0) {
    const auto [lo, hi] = first_input_box(cfg, lambda_prev);
    for (int k = 0; k < 2; ++k) worst = std::max(worst, box_violation(traj.inputs.front()(k), lo(k), hi(k)));
  }
  for (int j = 0; j < N; ++j) {
    const auto & x = traj.states[static_cast<std::size_t>(j)];
    const auto & u = traj.inputs[static_cast<std::size_t>(j)];
    const FrenetState next = discretize_dynamics(x, u, cfg.T_s);
    worst = std::max(worst, (traj.states[static_cast<std::size_t>(j) + 1] - next).cwiseAbs().maxCoeff());
    worst = std::max(worst, box_violation(u(0), cfg.alpha_bounds.min, cfg.alpha_bounds.max));
    worst = std::max(worst, box_violation(u(1), cfg.omega_bounds.min, cfg.omega_bounds.max));
    if (j + 1 < N) {
      const ControlInput du = traj.inputs[static_cast<std::size_t>(j) + 1] - u;
      worst = std::max(worst, box_violation(du(0), cfg.d_alpha_bounds.min, cfg.d_alpha_bounds.max));
      worst = std::max(worst, box_violation(du(1), cfg.d_omega_bounds.min, cfg.d_omega_bounds.max));
    }
  }
  for (int j = 1; j <= N; ++j) {
    const auto & x = traj.states[static_cast<std::size_t>(j)];
    worst = std::max(worst, box_violation(x(0), 0.0, path.length()));
    worst = std::max(worst, box_violation(x(1), cfg.d_bounds.min, cfg.d_bounds.max));
    worst = std::max(worst, box_violation(x(2), cfg.psi_bounds.min, cfg.psi_bounds.max));
    worst = std::max(worst, box_violation(x(3), cfg.nu_bounds.min, cfg.nu_bounds.max));
    if (!forecasts.empty()) {
      const double o = prediction::total_obstacle_field(x(0), x(1), forecasts, static_cast<std::size_t>(j), ctx.tvapf);
      worst = std::max(worst, o - ctx.tvapf.epsilon_o);
    }
  }
  const auto & xn = traj.states.back();
  const TerminalBox & box = traj.terminal;
  worst = std::max(worst, xn(0) - box.s_max);
  worst = std::max(worst, std::abs(xn(1) - box.d_center) - box.eps_d);
  worst = std::max(worst, std::abs(xn(2)) - box.eps_psi);
  worst = std::max(worst, xn(3) - box.nu_max);
  return worst;
}

PlannedTrajectory solve_ltp(
  double t0, const FrenetState & xi0, const std::vector<prediction::UncertainForecast> & forecasts,
  const PlannerContext & ctx, const PlannedTrajectory * warm_start, const ControlInput * lambda_prev)
{
  const auto start_time = Clock::now();
  const auto & path = path_of(ctx);
  const PlannerConfig & cfg = ctx.config;
  const auto [first_lo, first_hi] = first_input_box(cfg, lambda_prev);
  ControlInput seed = ControlInput::Zero();
  if (lambda_prev != nullptr) {
    seed << clamp((*lambda_prev)(0), cfg.alpha_bounds), clamp((*lambda_prev)(1), cfg.omega_bounds);
  }

  std::vector<Guess> guesses;
  if (warm_start != nullptr && !warm_start->fallback) {
    Guess g = shifted_guess(*warm_start, t0, xi0, ctx);
    if (!g.inputs.empty()) {
      g.inputs.front() = g.inputs.front().cwiseMax(first_lo).cwiseMin(first_hi);
      guesses.push_back(std::move(g));
    }
  }
  guesses.push_back(follow_guess(xi0, forecasts, ctx, seed));
  if (const auto * leader = right_lane_leader(forecasts, ctx, xi0(0)); leader != nullptr && path.lane_count() > 1) {
    guesses.push_back(overtake_guess(xi0, *leader, ctx, seed));
  }

  solver::SolveOptions options;
  options.max_iter = cfg.max_iterations;
  options.tol = 1e-6;

  PlannedTrajectory best;
  bool found = false;
  SolveStats stats;
  for (const Guess & g : guesses) {
    ++stats.starts_tried;
    // Stopping in a lane shared with oncoming traffic is not a safe invariant state, so every
    // horizon ends in the rightmost lane.
    const double d_center = path.lane_center(0);
    TerminalBox box;
    try {
      box = terminal_set(forecasts, ctx, xi0(0), d_center, g.states.back()(0));
    } catch (const EmptyTerminalSet &) {
      continue;
    }
    LtpProblem problem(
      path, xi0, forecasts, ctx.tvapf, ctx.potentials, cfg, reference_speeds(g.states, g.inputs, ctx), box);
    solver::NlpProblem nlp = problem.nlp();
    nlp.z0 = problem.pack(g.states, g.inputs);
    nlp.lower.segment<2>(LtpProblem::input_offset(0)) = first_lo;
    nlp.upper.segment<2>(LtpProblem::input_offset(0)) = first_hi;
    solver::SolveResult result;
    try {
      result = solver::solve(nlp, options);
    } catch (const solver::CallbackFailure &) {
      continue;
    }
    stats.iterations += result.iterations;
    if (result.status != solver::SolveStatus::Optimal && result.status != solver::SolveStatus::FeasiblePoint) {
      continue;
    }
    PlannedTrajectory candidate;
    candidate.t0 = t0;
    candidate.T_s = cfg.T_s;
    problem.unpack(result.z, candidate.states, candidate.inputs);
    candidate.terminal = box;
    const FrenetState & xn = candidate.states.back();
    try {
      const TerminalBox own = terminal_set(forecasts, ctx, xi0(0), d_center, xn(0));
      if (xn(0) > own.s_max + 1e-6) continue;
      candidate.terminal = own;
    } catch (const EmptyTerminalSet &) {
      continue;
    }
    candidate.stats.constraint_violation = constraint_violation(candidate, xi0, forecasts, ctx, lambda_prev);
    if (candidate.stats.constraint_violation > 1e-5) continue;
    ++stats.starts_feasible;
    if (!found || result.objective < best.stats.objective) {
      found = true;
      candidate.stats.objective = result.objective;
      candidate.stats.status = solver::to_string(result.status);
      candidate.stats.start = g.name;
      best = std::move(candidate);
    }
  }

  if (!found) {
    best = safe_stop_trajectory(t0, xi0, ctx);
    try {
      best.terminal = terminal_set(forecasts, ctx, xi0(0), path.lane_center(path.lane_of(xi0(1))), xi0(0));
    } catch (const EmptyTerminalSet &) {
      best.terminal = TerminalBox{};
    }
    best.stats.objective = std::numeric_limits<double>::quiet_NaN();
  }
  best.stats.iterations = stats.iterations;
  best.stats.starts_tried = stats.starts_tried;
  best.stats.starts_feasible = stats.starts_feasible;
  best.label = decision_label(best, forecasts, ctx);
  best.stats.wall_time = std::chrono::duration<double>(Clock::now() - start_time).count();
  return best;
}

}  // namespace tvapf::planner
