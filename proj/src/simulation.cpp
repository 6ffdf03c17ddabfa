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

#include "tvapf/simulation.hpp"

#include "tvapf/resampler.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

namespace tvapf::simulation
{
namespace
{
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

long steps_per(double period, double dt) { return std::max(1L, std::lround(period / dt)); }
}  // namespace

ActorState initial_actor(const scenario::ActorSpec & spec)
{
  return {spec.id, spec.s0, spec.d0, spec.v0, 0.0, spec.direction};
}

double target_speed(const scenario::ActorSpec & spec, double t)
{
  double target = spec.v0;
  for (const auto & p : spec.script) {
    if (p.t <= t + 1e-9) target = p.target_v;
  }
  return target;
}

ActorState step_actor(const scenario::ActorSpec & spec, const ActorState & state, double t, double T)
{
  ActorState next = state;
  const double target = target_speed(spec, t);
  next.a = std::clamp((target - state.v) / T, spec.a_bounds.min, spec.a_bounds.max);
  next.s = state.s + state.direction * T * state.v;
  next.v = std::clamp(state.v + T * next.a, spec.v_bounds.min, spec.v_bounds.max);
  return next;
}

void TrajectoryMailbox::publish(std::shared_ptr<const planner::PlannedTrajectory> traj)
{
  std::lock_guard<std::mutex> lock(mutex_);
  current_ = std::move(traj);
}

std::shared_ptr<const planner::PlannedTrajectory> TrajectoryMailbox::latest() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return current_;
}

planner::FrenetState ego_frenet(const geometry::ReferencePath & path, const tracker::VehicleState & chi)
{
  const auto q = geometry::cartesian_to_frenet(path, {chi(0), chi(1)});
  return {q.s, q.d, geometry::wrap_angle(chi(2) - path.heading(q.s)), std::max(chi(3), 0.0)};
}

std::vector<prediction::ObstacleState> sense(
  const scenario::Scenario & sc, const geometry::ReferencePath & path,
  const std::vector<ActorState> & actors, double ego_s)
{
  std::vector<prediction::ObstacleState> out;
  for (std::size_t i = 0; i < actors.size(); ++i) {
    const ActorState & a = actors[i];
    if (a.s < 0.0 || a.s > path.length() || std::abs(a.s - ego_s) > sc.sim.sensor_range) continue;
    const auto & spec = sc.actors[i];
    prediction::ObstacleState o;
    o.id = a.id;
    o.s_o = a.s;
    o.d_o = a.d;
    o.v_o = a.v;
    o.a_o = a.a;
    o.v_bounds = spec.v_bounds;
    o.a_bounds = spec.a_bounds;
    o.direction = a.direction;
    out.push_back(o);
  }
  return out;
}

std::vector<prediction::UncertainForecast> predict(
  const std::vector<prediction::ObstacleState> & sensed, const planner::PlannerConfig & config)
{
  std::vector<prediction::UncertainForecast> out;
  for (const auto & o : sensed) {
    out.push_back(prediction::propagate_obstacle(o, config.T_s, config.N));
  }
  return out;
}

planner::ControlInput planner_input(
  const geometry::ReferencePath & path, const tracker::VehicleState & chi, double a, double wheelbase)
{
  const planner::FrenetState xi = ego_frenet(path, chi);
  const double s = std::clamp(xi(0), 0.0, path.length());
  const double kappa = path.curvature(s);
  const double s_dot = xi(3) * std::cos(xi(2)) / std::max(1.0 - kappa * xi(1), 0.1);
  const double yaw_rate = chi(3) * std::tan(chi(4)) / wheelbase;
  return {a, yaw_rate - kappa * s_dot};
}

RunLog run(const scenario::Scenario & sc, const RunOptions & options)
{
  const auto wall_start = Clock::now();
  const geometry::ReferencePath path = scenario::build_path(sc);
  const planner::PlannerContext ctx = scenario::planner_context(sc, path);
  tracker::Tracker tracker(sc.tracker, sc.planner);
  const auto & tc = sc.tracker;

  const double dt = sc.sim.plant_step;
  const long n_steps = std::lround(sc.sim.duration / dt);
  const long tick_every = steps_per(tc.T_s, dt);
  const long plan_every = steps_per(sc.planner.instance_period, dt);
  const double jerk_step = sc.limits.jerk_max * dt;

  RunLog log;
  std::vector<ActorState> actors;
  for (const auto & spec : sc.actors) {
    actors.push_back(initial_actor(spec));
    log.actor_ids.push_back(spec.id);
  }
  tracker::VehicleState chi;
  chi << sc.ego.x0, sc.ego.y0, sc.ego.theta0, sc.ego.v0, 0.0;
  double a_applied = 0.0;
  tracker::VehicleInput u_cmd = tracker::VehicleInput::Zero();
  tracker::VehicleState ref0 = chi;
  double sigma = 0.0;
  TrackerStatus status = TrackerStatus::Ok;

  TrajectoryMailbox mailbox;
  std::future<planner::PlannedTrajectory> pending;
  InstanceRecord pending_record;
  double pending_deadline = 0.0;

  auto publish = [&](planner::PlannedTrajectory traj, InstanceRecord record, double t) {
    traj.id = static_cast<int>(log.instances.size());
    if (traj.fallback) {
      log.events.push_back({t, "safe_stop", fmt::format("instance {} fell back to maximum braking", traj.id)});
    }
    record.trajectory = traj;
    record.published = t;
    log.instances.push_back(std::move(record));
    mailbox.publish(std::make_shared<const planner::PlannedTrajectory>(std::move(traj)));
  };

  for (long i = 0; i <= n_steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    log.final_t = t;
    log.final_chi = chi;
    log.final_actors = actors;
    if (options.stop_time >= 0.0 && t >= options.stop_time - 1e-9) {
      break;
    }
    if (i % plan_every == 0) {
      InstanceRecord record;
      record.t = t;
      record.xi0 = ego_frenet(path, chi);
      record.sensed = sense(sc, path, actors, record.xi0(0));
      record.forecasts = predict(record.sensed, sc.planner);
      const planner::ControlInput lambda_now = planner_input(path, chi, a_applied, tc.wheelbase);
      const auto warm = mailbox.latest();
      if (options.parallel_planner) {
        if (pending.valid()) {
          publish(pending.get(), std::move(pending_record), t);
        }
        const auto warm_now = mailbox.latest();
        pending_record = record;
        pending_deadline = t + tc.T_s;
        pending = std::async(
          std::launch::async, [t, xi0 = record.xi0, forecasts = record.forecasts, &ctx, warm_now, lambda_now]() {
            return planner::solve_ltp(t, xi0, forecasts, ctx, warm_now.get(), &lambda_now);
          });
        if (!mailbox.latest()) {
          publish(pending.get(), std::move(pending_record), t);
        }
      } else {
        auto traj = planner::solve_ltp(t, record.xi0, record.forecasts, ctx, warm.get(), &lambda_now);
        publish(std::move(traj), std::move(record), t);
      }
    }
    // The concurrent solve overlaps one tracker period and is published at the next tick.
    if (pending.valid() && t >= pending_deadline - 1e-9) {
      publish(pending.get(), std::move(pending_record), t);
    }

    const bool tick = i % tick_every == 0;
    if (tick) {
      const auto active = mailbox.latest();
      try {
        const auto ref = resampler::resample(*active, path, t, tc.N, tc.T_s, tc.wheelbase);
        const auto tick_start = Clock::now();
        const auto result = tracker.step(chi, ref);
        log.tracker_time += seconds_since(tick_start);
        u_cmd = result.u0;
        sigma = result.sigma;
        ref0 = ref.front();
        status = result.infeasible ? TrackerStatus::Infeasible : TrackerStatus::Ok;
        if (result.infeasible) {
          log.events.push_back({t, "tracker_infeasible", result.status});
        }
      } catch (const resampler::HorizonExhausted & e) {
        const auto & prev = tracker.previous_input();
        u_cmd << std::max(tc.a_bounds.min, prev(0) + tc.da_bounds.min), 0.0;
        tracker.reset(u_cmd);
        status = TrackerStatus::HorizonExhausted;
        log.events.push_back({t, "horizon_exhausted", e.what()});
      }
    }

    a_applied += std::clamp(u_cmd(0) - a_applied, -jerk_step, jerk_step);
    a_applied = std::clamp(a_applied, -sc.limits.a_max, sc.limits.a_max);

    StepRecord row;
    row.t = t;
    row.chi = chi;
    row.a = a_applied;
    row.u_cmd = u_cmd;
    const auto xi = ego_frenet(path, chi);
    row.s = xi(0);
    row.d = xi(1);
    row.trajectory_id = mailbox.latest() ? mailbox.latest()->id : -1;
    row.tick = tick;
    row.ref = ref0;
    row.sigma = sigma;
    row.tracker_status = status;
    row.actors = actors;
    for (const auto & a : actors) {
      if (a.s < 0.0 || a.s > path.length()) continue;
      const auto p = geometry::frenet_to_cartesian(path, {a.s, a.d});
      const double gap = std::hypot(p.x - chi(0), p.y - chi(1));
      if (gap <= sc.sim.footprint_margin) {
        log.events.push_back({t, "collision", fmt::format("gap to {} is {:.3f} m", a.id, gap)});
      }
    }
    log.steps.push_back(std::move(row));
    if (i == n_steps) break;

    const double a_plant = std::max(a_applied, -chi(3) / dt);
    chi = tracker::bicycle_step(chi, {a_plant, u_cmd(1)}, dt, tc.wheelbase);
    chi(3) = std::max(chi(3), 0.0);
    chi(4) = std::clamp(chi(4), -tc.delta_max, tc.delta_max);
    chi(2) = geometry::wrap_angle(chi(2));
    for (std::size_t k = 0; k < actors.size(); ++k) {
      actors[k] = step_actor(sc.actors[k], actors[k], t, dt);
    }
  }
  if (pending.valid()) {
    publish(pending.get(), std::move(pending_record), log.final_t);
  }
  log.wall_time = seconds_since(wall_start);
  return log;
}

}  // namespace tvapf::simulation
