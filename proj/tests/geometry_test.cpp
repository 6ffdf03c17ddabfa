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

#include "tvapf/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace
{
using tvapf::geometry::AmbiguousProjection;
using tvapf::geometry::boundary_distances;
using tvapf::geometry::cartesian_to_frenet;
using tvapf::geometry::CartesianPoint;
using tvapf::geometry::frenet_to_cartesian;
using tvapf::geometry::FrenetPoint;
using tvapf::geometry::OutOfRange;
using tvapf::geometry::ReferencePath;

constexpr double kPi = std::numbers::pi;
constexpr double kRadius = 50.0;

ReferencePath straight_path()
{
  std::vector<CartesianPoint> pts;
  for (int i = 0; i <= 20; ++i) {
    pts.push_back({5.0 * i, 0.0});
  }
  return ReferencePath(pts, 2, 4.0, {{0.0, 12.5}});
}

// Three quarters of a counter-clockwise circle starting at (R, 0).
ReferencePath circle_path()
{
  std::vector<CartesianPoint> pts;
  const int n = 240;
  for (int i = 0; i <= n; ++i) {
    const double t = 1.5 * kPi * i / n;
    pts.push_back({kRadius * std::cos(t), kRadius * std::sin(t)});
  }
  return ReferencePath(pts, 2, 4.0, {{0.0, 12.5}});
}

ReferencePath wavy_path()
{
  std::vector<CartesianPoint> pts;
  for (int i = 0; i <= 80; ++i) {
    const double x = 2.5 * i;
    pts.push_back({x, 6.0 * std::sin(x / 35.0) + 0.002 * x * x});
  }
  return ReferencePath(pts, 2, 4.0, {{0.0, 12.5}, {100.0, 10.0}});
}

double max_abs_curvature(const ReferencePath & path)
{
  double k = 0.0;
  for (double c : path.curvatures()) {
    k = std::max(k, std::abs(c));
  }
  return k;
}

double round_trip_error(const ReferencePath & path, unsigned seed)
{
  std::mt19937_64 rng(seed);
  const double kappa = max_abs_curvature(path);
  const double half_width = std::min(8.0, kappa > 0.0 ? 0.4 / kappa : 8.0);
  std::uniform_real_distribution<double> s_dist(1.0, path.length() - 1.0);
  std::uniform_real_distribution<double> d_dist(-half_width, half_width);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const FrenetPoint q{s_dist(rng), d_dist(rng)};
    const CartesianPoint p = frenet_to_cartesian(path, q);
    const CartesianPoint back = frenet_to_cartesian(path, cartesian_to_frenet(path, p));
    worst = std::max(worst, std::hypot(back.x - p.x, back.y - p.y));
  }
  return worst;
}
}  // namespace

TEST(CubicSplineTest, ReproducesCubicExactly)
{
  std::vector<double> u;
  std::vector<double> y;
  for (int i = 0; i < 7; ++i) {
    const double x = 0.7 * i * i;
    u.push_back(x);
    y.push_back(x * x * x - 2.0 * x + 1.0);
  }
  const tvapf::geometry::CubicSpline spline(u, y);
  for (double x = 0.0; x <= u.back(); x += 0.37) {
    EXPECT_NEAR(spline.value(x), x * x * x - 2.0 * x + 1.0, 1e-8 * (1.0 + x * x * x));
    EXPECT_NEAR(spline.second_derivative(x), 6.0 * x, 1e-7 * (1.0 + x));
  }
}

TEST(CubicSplineTest, RejectsUnsortedKnots)
{
  EXPECT_THROW(tvapf::geometry::CubicSpline({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}), std::invalid_argument);
}

TEST(ReferencePathTest, StraightPathIdentity)
{
  const auto path = straight_path();
  EXPECT_NEAR(path.length(), 100.0, 1e-12);
  const FrenetPoint q = cartesian_to_frenet(path, {10.0, 2.0});
  EXPECT_NEAR(q.s, 10.0, 1e-9);
  EXPECT_NEAR(q.d, 2.0, 1e-9);
  const CartesianPoint p = frenet_to_cartesian(path, {10.0, 2.0});
  EXPECT_NEAR(p.x, 10.0, 1e-12);
  EXPECT_NEAR(p.y, 2.0, 1e-12);
  const FrenetPoint on = cartesian_to_frenet(path, {7.5, 0.0});
  EXPECT_NEAR(on.s, 7.5, 1e-9);
  EXPECT_NEAR(on.d, 0.0, 1e-12);
}

TEST(ReferencePathTest, StartPointMapsToFirstSample)
{
  const auto path = wavy_path();
  const CartesianPoint p = frenet_to_cartesian(path, {0.0, 0.0});
  EXPECT_NEAR(p.x, path.samples().front().x, 1e-12);
  EXPECT_NEAR(p.y, path.samples().front().y, 1e-12);
}

TEST(ReferencePathTest, CircleMatchesClosedForm)
{
  const auto path = circle_path();
  EXPECT_NEAR(path.length(), 1.5 * kPi * kRadius, 1e-5);
  // Left of a counter-clockwise circle points to the center.
  const FrenetPoint q = cartesian_to_frenet(path, {0.0, 52.0});
  EXPECT_NEAR(q.s, 25.0 * kPi, 1e-5);
  EXPECT_NEAR(q.d, -2.0, 1e-6);
  const CartesianPoint p = frenet_to_cartesian(path, {25.0 * kPi, -2.0});
  EXPECT_NEAR(p.x, 0.0, 1e-5);
  EXPECT_NEAR(p.y, 52.0, 1e-5);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.05, 1.45 * kPi);
  std::uniform_real_distribution<double> radius(kRadius - 20.0, kRadius + 20.0);
  for (int i = 0; i < 200; ++i) {
    const double t = angle(rng);
    const double r = radius(rng);
    const FrenetPoint f = cartesian_to_frenet(path, {r * std::cos(t), r * std::sin(t)});
    EXPECT_NEAR(f.s, kRadius * t, 1e-5);
    EXPECT_NEAR(f.d, kRadius - r, 1e-6);
  }
  for (double s = 1.0; s < path.length(); s += 7.0) {
    EXPECT_NEAR(path.curvature(s), 1.0 / kRadius, 1e-6);
  }
}

TEST(ReferencePathTest, RoundTripStraight)
{
  EXPECT_LT(round_trip_error(straight_path(), 1), 1e-6);
}

TEST(ReferencePathTest, RoundTripCircle)
{
  EXPECT_LT(round_trip_error(circle_path(), 2), 1e-6);
}

TEST(ReferencePathTest, RoundTripSpline)
{
  EXPECT_LT(round_trip_error(wavy_path(), 3), 1e-6);
}

TEST(ReferencePathTest, MonotoneAlongOffsetCurve)
{
  for (const auto & path : {circle_path(), wavy_path()}) {
    for (double d : {-4.0, 0.0, 3.0}) {
      double previous = -1.0;
      for (double s = 0.5; s < path.length() - 0.5; s += 0.5) {
        const FrenetPoint q = cartesian_to_frenet(path, frenet_to_cartesian(path, {s, d}));
        EXPECT_GE(q.s, previous);
        previous = q.s;
      }
    }
  }
}

TEST(ReferencePathTest, HeadingAndCurvatureMatchSampleDifferences)
{
  const auto path = wavy_path();
  const auto & pts = path.samples();
  const auto & s = path.arc_length();
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double fd_heading = std::atan2(pts[i + 1].y - pts[i - 1].y, pts[i + 1].x - pts[i - 1].x);
    EXPECT_NEAR(tvapf::geometry::wrap_angle(path.headings()[i] - fd_heading), 0.0, 1e-3);
    const double h0 = std::atan2(pts[i].y - pts[i - 1].y, pts[i].x - pts[i - 1].x);
    const double h1 = std::atan2(pts[i + 1].y - pts[i].y, pts[i + 1].x - pts[i].x);
    const double fd_kappa = tvapf::geometry::wrap_angle(h1 - h0) / (0.5 * (s[i + 1] - s[i - 1]));
    EXPECT_NEAR(path.curvatures()[i], fd_kappa, 1e-3);
  }
}

TEST(ReferencePathTest, ProjectionErrors)
{
  const auto line = straight_path();
  EXPECT_THROW(cartesian_to_frenet(line, {-5.0, 1.0}), OutOfRange);
  EXPECT_THROW(cartesian_to_frenet(line, {106.0, 0.0}), OutOfRange);
  EXPECT_THROW(frenet_to_cartesian(line, {100.5, 0.0}), OutOfRange);
  EXPECT_THROW(frenet_to_cartesian(line, {-0.1, 0.0}), OutOfRange);
  const auto circle = circle_path();
  EXPECT_THROW(cartesian_to_frenet(circle, {0.0, 0.0}), AmbiguousProjection);
}

TEST(ReferencePathTest, RejectsCurvatureJump)
{
  std::vector<CartesianPoint> pts{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {3, 1}, {3, 2}, {3, 3}};
  EXPECT_THROW(ReferencePath(pts, 2, 4.0, {{0.0, 10.0}}), std::invalid_argument);
}

TEST(ReferencePathTest, RejectsDuplicateSamples)
{
  std::vector<CartesianPoint> pts{{0, 0}, {1, 0}, {1, 0}, {3, 0}};
  EXPECT_THROW(ReferencePath(pts, 2, 4.0, {{0.0, 10.0}}), std::invalid_argument);
}

TEST(ReferencePathTest, SpeedLimitSegments)
{
  const auto path = wavy_path();
  EXPECT_DOUBLE_EQ(path.speed_limit(50.0), 12.5);
  EXPECT_DOUBLE_EQ(path.speed_limit(100.0), 10.0);
  EXPECT_DOUBLE_EQ(path.speed_limit(150.0), 10.0);
}

TEST(BoundaryDistancesTest, TwoLaneRoad)
{
  const auto path = straight_path();
  const auto right_center = boundary_distances(path, {10.0, -2.0});
  EXPECT_DOUBLE_EQ(right_center.left, 6.0);
  EXPECT_DOUBLE_EQ(right_center.right, 2.0);
  EXPECT_DOUBLE_EQ(right_center.preferred_lane, 2.0);
  const auto middle = boundary_distances(path, {10.0, 0.0});
  EXPECT_DOUBLE_EQ(middle.left, middle.right);
  EXPECT_DOUBLE_EQ(middle.preferred_lane, 0.0);
  EXPECT_DOUBLE_EQ(path.lane_center(0), -2.0);
  EXPECT_DOUBLE_EQ(path.lane_center(1), 2.0);
  EXPECT_EQ(path.lane_of(-0.1), 0);
  EXPECT_EQ(path.lane_of(0.1), 1);
}

TEST(BoundaryDistancesTest, AffineWithUnitSlope)
{
  const auto path = straight_path();
  for (double d = -7.0; d < 7.0; d += 0.9) {
    const auto a = boundary_distances(path, {5.0, d});
    const auto b = boundary_distances(path, {5.0, d + 0.5});
    EXPECT_NEAR(b.left - a.left, -0.5, 1e-12);
    EXPECT_NEAR(b.right - a.right, 0.5, 1e-12);
    EXPECT_NEAR(b.preferred_lane - a.preferred_lane, -0.5, 1e-12);
  }
}

TEST(WrapAngleTest, Range)
{
  EXPECT_NEAR(tvapf::geometry::wrap_angle(3.0 * kPi), kPi, 1e-12);
  EXPECT_NEAR(tvapf::geometry::wrap_angle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(tvapf::geometry::wrap_angle(0.25), 0.25, 1e-15);
}
