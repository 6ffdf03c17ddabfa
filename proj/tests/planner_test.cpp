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
#include "tvapf/scenario.hpp"

#include "scene_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace pl = tvapf::planner;
namespace pred = tvapf::prediction;

namespace
{

// Stopping distance of the jerk-limited profile by fine explicit integration.
double integrated_stop_distance(double v, double tau, double a_min, double j_max)
{
  const double h = 1e-5;
  double s = 0.0;
  double a = 0.0;
  double t = 0.0;
  while (v > 0.0) {
    if (t >= tau) a = std::max(a - j_max * h, a_min);
    const double v_next = std::max(0.0, v + a * h);
    s += 0.5 * (v + v_next) * h;
    v = v_next;
    t += h;
  }
  return s;
}

struct Scene
{
  tvapf::scenario::Scenario sc;
  tvapf::geometry::ReferencePath path;
  pl::PlannerContext ctx;

  explicit Scene(const nlohmann::json & j)
  : sc(tvapf::test::parse(j)), path(tvapf::scenario::build_path(sc)),
    ctx(tvapf::scenario::planner_context(sc, path))
  {
  }

  pred::UncertainForecast forecast(const pred::ObstacleState & o) const
  {
    return pred::propagate_obstacle(o, ctx.config.T_s, ctx.config.N);
  }
};

pred::ObstacleState obstacle(
  const std::string & id, double s, double d, double v, int direction, pred::Interval vb, pred::Interval ab)
{
  pred::ObstacleState o;
  o.id = id;
  o.s_o = s;
  o.d_o = d;
  o.v_o = v;
  o.direction = direction;
  o.v_bounds = vb;
  o.a_bounds = ab;
  return o;
}

pl::FrenetState ego_state(double s, double d, double v)
{
  pl::FrenetState x;
  x << s, d, 0.0, v;
  return x;
}

double max_reintegration_error(const pl::PlannedTrajectory & traj)
{
  double worst = 0.0;
  for (std::size_t j = 0; j < traj.inputs.size(); ++j) {
    const auto next = pl::discretize_dynamics(traj.states[j], traj.inputs[j], traj.T_s);
    worst = std::max(worst, (next - traj.states[j + 1]).cwiseAbs().maxCoeff());
  }
  return worst;
}

double max_field_excess(
  const pl::PlannedTrajectory & traj, const std::vector<pred::UncertainForecast> & forecasts,
  const pred::TvapfParams & tvapf)
{
  double worst = -1.0;
  for (std::size_t j = 1; j < traj.states.size(); ++j) {
    const double o = pred::total_obstacle_field(traj.states[j](0), traj.states[j](1), forecasts, j, tvapf);
    worst = std::max(worst, o - tvapf.epsilon_o);
  }
  return worst;
}

}  // namespace

TEST(BrakingDistanceTest, MatchesWorkedValues)
{
  EXPECT_NEAR(pl::braking_distance(5.0, 0.5, -0.9, 0.9), 21.389, 1e-3);
  EXPECT_NEAR(pl::braking_distance(8.0, 0.5, -0.9, 0.9), 47.556, 1e-3);
  EXPECT_DOUBLE_EQ(pl::braking_distance(0.0, 0.5, -0.9, 0.9), 0.0);
}

TEST(BrakingDistanceTest, BoundsIntegratedJerkLimitedStop)
{
  for (double v : {0.5, 2.0, 5.0, 8.0, 12.5}) {
    const double D = pl::braking_distance(v, 0.5, -0.9, 0.9);
    EXPECT_GE(D, integrated_stop_distance(v, 0.5, -0.9, 0.9)) << v;
  }
}

TEST(BrakingDistanceTest, RejectsNonBrakingParameters)
{
  EXPECT_THROW(pl::braking_distance(5.0, 0.5, 0.2, 0.9), std::invalid_argument);
  EXPECT_THROW(pl::braking_distance(5.0, 0.5, -0.9, 0.0), std::invalid_argument);
}

TEST(TerminalSetTest, SafeLimitSubstitution)
{
  EXPECT_NEAR(pl::safe_longitudinal_limit(500.0, 40.0, 12.0, 21.389), 438.611, 1e-9);
  // A keep-out wider than the spread takes over.
  EXPECT_NEAR(pl::safe_longitudinal_limit(500.0, 5.0, 12.0, 21.389), 466.611, 1e-9);
}

TEST(TerminalSetTest, NoObstacleIsBoundedByPathEnd)
{
  Scene scene(tvapf::test::straight_road_json());
  const auto box = pl::terminal_set({}, scene.ctx, 10.0, -2.0, 10.0);
  EXPECT_NEAR(box.s_max, scene.path.length() - box.braking_distance, 1e-9);
  EXPECT_TRUE(box.leader_id.empty());
  EXPECT_DOUBLE_EQ(box.nu_max, scene.ctx.config.terminal.nu_ter);
}

TEST(TerminalSetTest, LeaderLimitsTheBox)
{
  Scene scene(tvapf::test::straight_road_json());
  const auto f = scene.forecast(obstacle("L", 300.0, -2.0, 5.0, 1, {0.0, 12.5}, {-0.9, 0.9}));
  const auto & last = f.steps.back();
  const double D = pl::braking_distance(8.0, 0.5, -0.9, 0.9);
  const double expected =
    last.s_center - std::max(last.delta_s, pl::keep_out_distance(last, scene.ctx.tvapf)) - D;
  const auto box = pl::terminal_set({f}, scene.ctx, 10.0, -2.0, 10.0);
  EXPECT_NEAR(box.s_max, expected, 1e-9);
  EXPECT_EQ(box.leader_id, "L");
  // An actor in the other lane does not bound the right-lane box.
  const auto other = scene.forecast(obstacle("O", 300.0, 2.0, 5.0, -1, {0.0, 12.5}, {-0.9, 0.9}));
  EXPECT_TRUE(pl::terminal_set({other}, scene.ctx, 10.0, -2.0, 10.0).leader_id.empty());
}

TEST(TerminalSetTest, EgoPastLimitThrows)
{
  Scene scene(tvapf::test::straight_road_json());
  const auto f = scene.forecast(obstacle("L", 60.0, -2.0, 0.0, 1, {0.0, 0.0}, {0.0, 0.0}));
  EXPECT_THROW(pl::terminal_set({f}, scene.ctx, 50.0, -2.0, 50.0), pl::EmptyTerminalSet);
}

TEST(TerminalSetTest, KeepOutHoldsFieldBelowThreshold)
{
  Scene scene(tvapf::test::straight_road_json());
  const auto f = scene.forecast(obstacle("L", 300.0, -2.0, 5.0, 1, {5.0, 5.0}, {0.0, 0.0}));
  const auto & last = f.steps.back();
  const double k = pl::keep_out_distance(last, scene.ctx.tvapf);
  const double o = pred::total_obstacle_field(last.s_center - k, -2.0, {f}, f.steps.size() - 1, scene.ctx.tvapf);
  EXPECT_NEAR(o, 0.5 * scene.ctx.tvapf.epsilon_o, 1e-9);
}

TEST(SafeStopTest, BrakesToStandstillWithinLimits)
{
  Scene scene(tvapf::test::straight_road_json());
  const auto traj = pl::safe_stop_trajectory(0.0, ego_state(100.0, -2.0, 10.0), scene.ctx);
  EXPECT_TRUE(traj.fallback);
  EXPECT_EQ(traj.label, pl::Decision::SafeStop);
  EXPECT_NEAR(traj.states.back()(3), 0.0, 1e-9);
  const auto & cfg = scene.ctx.config;
  for (std::size_t j = 0; j < traj.inputs.size(); ++j) {
    EXPECT_GE(traj.inputs[j](0), cfg.alpha_bounds.min - 1e-12);
    if (j > 0) {
      EXPECT_GE(traj.inputs[j](0) - traj.inputs[j - 1](0), -cfg.terminal.j_max * cfg.T_s - 1e-12);
    }
  }
  EXPECT_LT(max_reintegration_error(traj), 1e-9);
}

TEST(BrakingRolloutTest, StopsWithinBrakingDistance)
{
  pl::TerminalParams tp;
  for (double v : {1.0, 4.0, 8.0}) {
    const auto roll = pl::braking_rollout(ego_state(0.0, -2.0, v), tp, 0.01);
    EXPECT_DOUBLE_EQ(roll.back()(3), 0.0);
    EXPECT_LE(roll.back()(0), pl::braking_distance(v, tp.tau, tp.alpha_min, tp.j_max));
    EXPECT_NEAR(roll.back()(0), integrated_stop_distance(v, tp.tau, tp.alpha_min, tp.j_max), 0.05);
  }
}

TEST(SolveLtpTest, EmptyRoadAcceleratesAndHoldsLane)
{
  Scene scene(tvapf::test::straight_road_json());
  const auto xi0 = ego_state(10.0, -2.0, 8.33);
  const auto traj = pl::solve_ltp(0.0, xi0, {}, scene.ctx, nullptr);
  ASSERT_FALSE(traj.fallback);
  EXPECT_EQ(traj.label, pl::Decision::KeepLane);
  EXPECT_LT(pl::constraint_violation(traj, xi0, {}, scene.ctx), 1e-5);
  EXPECT_LT(max_reintegration_error(traj), 1e-6);
  double v_peak = 0.0;
  // Speed rises without dipping until it first gets close to the desired speed.
  for (std::size_t j = 0; j + 1 < traj.states.size() && traj.states[j](3) < 11.9; ++j) {
    EXPECT_GE(traj.states[j + 1](3), traj.states[j](3) - 1e-6) << j;
  }
  for (const auto & x : traj.states) {
    EXPECT_NEAR(x(1), -2.0, 0.1);
    v_peak = std::max(v_peak, x(3));
  }
  EXPECT_NEAR(v_peak, 12.0, 0.3);
  EXPECT_LE(traj.states.back()(3), scene.ctx.config.terminal.nu_ter + 1e-6);
}

TEST(SolveLtpTest, SlowLeaderWithClearLeftLaneIsOvertaken)
{
  Scene scene(tvapf::test::straight_road_json());
  const std::vector<pred::UncertainForecast> forecasts{
    scene.forecast(obstacle("L1", 90.0, -2.0, 3.0, 1, {3.0, 3.0}, {0.0, 0.0}))};
  const auto xi0 = ego_state(10.0, -2.0, 10.0);
  const auto traj = pl::solve_ltp(0.0, xi0, forecasts, scene.ctx, nullptr);
  ASSERT_FALSE(traj.fallback);
  EXPECT_EQ(traj.label, pl::Decision::Overtake);
  EXPECT_LT(pl::constraint_violation(traj, xi0, forecasts, scene.ctx), 1e-5);
  EXPECT_LE(max_field_excess(traj, forecasts, scene.ctx.tvapf), 1e-6);
  EXPECT_NEAR(traj.states.back()(1), -2.0, scene.ctx.config.terminal.eps_d + 1e-6);
  EXPECT_GT(traj.states.back()(0), forecasts[0].steps.back().s_center);
}

TEST(SolveLtpTest, OncomingTrafficDelaysOvertake)
{
  Scene scene(tvapf::test::straight_road_json());
  // The oncoming stream occupies the left lane around the leader for the whole horizon.
  std::vector<pred::UncertainForecast> forecasts{
    scene.forecast(obstacle("L1", 90.0, -2.0, 3.0, 1, {3.0, 3.0}, {0.0, 0.0}))};
  for (int k = 0; k < 6; ++k) {
    forecasts.push_back(scene.forecast(
      obstacle("O" + std::to_string(k), 150.0 + 80.0 * k, 2.0, 8.0, -1, {8.0, 8.0}, {0.0, 0.0})));
  }
  const auto xi0 = ego_state(10.0, -2.0, 10.0);
  const auto traj = pl::solve_ltp(0.0, xi0, forecasts, scene.ctx, nullptr);
  ASSERT_FALSE(traj.fallback);
  EXPECT_EQ(traj.label, pl::Decision::FollowLeader);
  const double boundary = scene.path.rightmost_lane_left_boundary();
  for (const auto & x : traj.states) EXPECT_LT(x(1), boundary);
  EXPECT_LT(traj.states.back()(3), xi0(3));
  EXPECT_LE(max_field_excess(traj, forecasts, scene.ctx.tvapf), 1e-6);
  EXPECT_LE(traj.states.back()(0), traj.terminal.s_max + 1e-6);
}

TEST(SolveLtpTest, WarmStartDoesNotIncreaseCost)
{
  Scene scene(tvapf::test::straight_road_json());
  const std::vector<pred::UncertainForecast> forecasts{
    scene.forecast(obstacle("L1", 150.0, -2.0, 6.0, 1, {6.0, 6.0}, {0.0, 0.0}))};
  const auto xi0 = ego_state(10.0, -2.0, 9.0);
  const auto first = pl::solve_ltp(0.0, xi0, forecasts, scene.ctx, nullptr);
  ASSERT_FALSE(first.fallback);
  const auto second = pl::solve_ltp(0.0, xi0, forecasts, scene.ctx, &first);
  ASSERT_FALSE(second.fallback);
  EXPECT_LE(second.stats.objective, first.stats.objective + 1e-6);
}

TEST(SolveLtpTest, FirstInputStaysWithinOneRateStepOfPrevious)
{
  Scene scene(tvapf::test::straight_road_json());
  const auto xi0 = ego_state(10.0, -2.0, 8.33);
  const pl::ControlInput prev(-0.5, 0.01);
  const auto traj = pl::solve_ltp(0.0, xi0, {}, scene.ctx, nullptr, &prev);
  ASSERT_FALSE(traj.fallback);
  const auto & cfg = scene.ctx.config;
  EXPECT_LE(std::abs(traj.inputs.front()(0) - prev(0)), cfg.d_alpha_bounds.max + 1e-6);
  EXPECT_LE(std::abs(traj.inputs.front()(1) - prev(1)), cfg.d_omega_bounds.max + 1e-6);
  EXPECT_LT(pl::constraint_violation(traj, xi0, {}, scene.ctx, &prev), 1e-5);
}

TEST(SolveLtpTest, UnavoidableObstacleFallsBackToSafeStop)
{
  Scene scene(tvapf::test::straight_road_json());
  // Stationary blockers in both lanes just ahead leave no admissible terminal state.
  const std::vector<pred::UncertainForecast> forecasts{
    scene.forecast(obstacle("A", 40.0, -2.0, 0.0, 1, {0.0, 0.0}, {0.0, 0.0})),
    scene.forecast(obstacle("B", 40.0, 2.0, 0.0, 1, {0.0, 0.0}, {0.0, 0.0}))};
  const auto traj = pl::solve_ltp(0.0, ego_state(10.0, -2.0, 12.0), forecasts, scene.ctx, nullptr);
  EXPECT_TRUE(traj.fallback);
  EXPECT_EQ(traj.label, pl::Decision::SafeStop);
}

TEST(DecisionLabelTest, ClassifiesLaneUse)
{
  Scene scene(tvapf::test::straight_road_json());
  pl::PlannedTrajectory traj;
  traj.T_s = scene.ctx.config.T_s;
  for (int j = 0; j <= scene.ctx.config.N; ++j) traj.states.push_back(ego_state(10.0 + 6.0 * j, -2.0, 12.0));
  traj.inputs.assign(static_cast<std::size_t>(scene.ctx.config.N), pl::ControlInput::Zero());
  EXPECT_EQ(pl::decision_label(traj, {}, scene.ctx), pl::Decision::KeepLane);

  const std::vector<pred::UncertainForecast> slow{
    scene.forecast(obstacle("L1", 100.0, -2.0, 3.0, 1, {3.0, 3.0}, {0.0, 0.0}))};
  EXPECT_EQ(pl::decision_label(traj, slow, scene.ctx), pl::Decision::FollowLeader);

  traj.states[30](1) = 2.0;
  EXPECT_EQ(pl::decision_label(traj, slow, scene.ctx), pl::Decision::Overtake);

  traj.fallback = true;
  EXPECT_EQ(pl::decision_label(traj, slow, scene.ctx), pl::Decision::SafeStop);
}

TEST(TerminalSetPropertyTest, BrakingFromSampledTerminalStatesStaysSafe)
{
  Scene scene(tvapf::test::straight_road_json());
  const auto & cfg = scene.ctx.config;
  const auto & tp = cfg.terminal;
  const double D = pl::braking_distance(tp.nu_ter, tp.tau, tp.alpha_min, tp.j_max);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int failures = 0;
  for (int n = 0; n < 200; ++n) {
    const double v = 12.5 * u01(rng);
    const double spread = 0.3 * u01(rng);
    const auto f = scene.forecast(obstacle(
      "L", 150.0 + 200.0 * u01(rng), -2.0, v, 1, {std::max(0.0, v - 2.0), std::min(12.5, v + 2.0)},
      {-spread, spread}));
    pl::TerminalBox box;
    try {
      box = pl::terminal_set({f}, scene.ctx, 0.0, -2.0, 0.0);
    } catch (const pl::EmptyTerminalSet &) {
      continue;
    }
    pl::FrenetState x;
    x << box.s_max * u01(rng), -2.0 + tp.eps_d * (2.0 * u01(rng) - 1.0), 0.0, tp.nu_ter * u01(rng);
    const auto roll = pl::braking_rollout(x, tp, 0.01);
    bool ok = roll.back()(0) <= box.s_max + D + 1e-9;
    for (const auto & r : roll) {
      ok = ok && pred::total_obstacle_field(r(0), r(1), {f}, f.steps.size() - 1, scene.ctx.tvapf) <=
                   scene.ctx.tvapf.epsilon_o;
    }
    failures += ok ? 0 : 1;
  }
  EXPECT_EQ(failures, 0);
}

TEST(PlannerContextTest, MissingPathThrows)
{
  pl::PlannerContext ctx;
  EXPECT_THROW(pl::solve_ltp(0.0, ego_state(0.0, -2.0, 5.0), {}, ctx, nullptr), std::invalid_argument);
}
