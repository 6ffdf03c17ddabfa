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

#include "tvapf/resampler.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace rs = tvapf::resampler;
using tvapf::geometry::CartesianPoint;
using tvapf::geometry::ReferencePath;
using tvapf::planner::FrenetState;
using tvapf::planner::PlannedTrajectory;

namespace
{
ReferencePath straight_path()
{
  std::vector<CartesianPoint> pts;
  for (int i = 0; i <= 100; ++i) pts.push_back({10.0 * i, 0.0});
  return ReferencePath(pts, 2, 4.0, {{0.0, 12.5}});
}

PlannedTrajectory constant_speed(double t0, double s0, double d, double nu, int n, double T = 0.5)
{
  PlannedTrajectory traj;
  traj.t0 = t0;
  traj.T_s = T;
  for (int j = 0; j <= n; ++j) traj.states.push_back(FrenetState(s0 + nu * T * j, d, 0.0, nu));
  traj.inputs.assign(static_cast<std::size_t>(n), {0.0, 0.0});
  return traj;
}
}  // namespace

TEST(InterpolateTest, ExactAtKnots)
{
  PlannedTrajectory traj = constant_speed(10.0, 50.0, -2.0, 8.0, 6);
  traj.states[3](1) = -1.3;
  traj.states[3](3) = 8.4;
  for (std::size_t j = 0; j < traj.states.size(); ++j) {
    const FrenetState x = rs::interpolate(traj, traj.t0 + traj.T_s * static_cast<double>(j));
    EXPECT_LT((x - traj.states[j]).cwiseAbs().maxCoeff(), 1e-12) << j;
  }
}

TEST(InterpolateTest, LinearBetweenKnots)
{
  PlannedTrajectory traj = constant_speed(0.0, 0.0, 0.0, 10.0, 2);
  traj.states[1](1) = 1.0;
  const FrenetState x = rs::interpolate(traj, 0.125);
  EXPECT_NEAR(x(0), 1.25, 1e-12);
  EXPECT_NEAR(x(1), 0.25, 1e-12);
}

TEST(InterpolateTest, OutsideTrajectoryThrows)
{
  const PlannedTrajectory traj = constant_speed(5.0, 0.0, 0.0, 10.0, 4);
  EXPECT_THROW(rs::interpolate(traj, 4.9), rs::HorizonExhausted);
  EXPECT_THROW(rs::interpolate(traj, 7.1), rs::HorizonExhausted);
  EXPECT_NO_THROW(rs::interpolate(traj, 7.0));
}

TEST(ResampleTest, ConstantSpeedAdvancesPerTick)
{
  const ReferencePath path = straight_path();
  const PlannedTrajectory traj = constant_speed(0.0, 40.0, -2.0, 9.0, 20);
  const auto ref = rs::resample(traj, path, 1.3, 10, 0.2, 2.7);
  ASSERT_EQ(ref.size(), 11u);
  for (std::size_t k = 0; k < ref.size(); ++k) {
    EXPECT_NEAR(ref[k](0), 40.0 + 9.0 * (1.3 + 0.2 * static_cast<double>(k)), 1e-9);
    EXPECT_NEAR(ref[k](1), -2.0, 1e-9);
    EXPECT_NEAR(ref[k](2), 0.0, 1e-12);
    EXPECT_NEAR(ref[k](3), 9.0, 1e-12);
    EXPECT_NEAR(ref[k](4), 0.0, 1e-12);
  }
}

TEST(ResampleTest, WindowPastTrajectoryEndThrows)
{
  const ReferencePath path = straight_path();
  const PlannedTrajectory traj = constant_speed(0.0, 40.0, -2.0, 9.0, 6);
  EXPECT_NO_THROW(rs::resample(traj, path, 1.0, 10, 0.2, 2.7));
  EXPECT_THROW(rs::resample(traj, path, 1.01, 10, 0.2, 2.7), rs::HorizonExhausted);
}

TEST(ResampleTest, LateralMotionSteersTowardTheMotion)
{
  const ReferencePath path = straight_path();
  PlannedTrajectory traj = constant_speed(0.0, 40.0, -2.0, 10.0, 8);
  for (std::size_t j = 1; j < traj.states.size(); ++j) traj.states[j](2) = 0.05 * static_cast<double>(j);
  const auto ref = rs::resample(traj, path, 0.0, 10, 0.2, 2.7);
  for (const auto & chi : ref) EXPECT_GT(chi(4), 0.0);
  EXPECT_NEAR(ref[0](4), std::atan(2.7 * (0.1 / 10.0)), 1e-9);
}
