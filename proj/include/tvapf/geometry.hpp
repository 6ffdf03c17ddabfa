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

#ifndef TVAPF__GEOMETRY_HPP_
#define TVAPF__GEOMETRY_HPP_

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace tvapf::geometry
{

struct CartesianPoint
{
  double x{0.0};
  double y{0.0};
};

/// Road-aligned coordinates. d is positive to the left of the travel direction.
struct FrenetPoint
{
  double s{0.0};
  double d{0.0};
};

struct SpeedLimitSegment
{
  double s_start{0.0};
  double speed_limit{0.0};
};

/// Signed distances used by the static potentials: h_l to the left road edge, h_r to the right
/// road edge and h_c to the left boundary of the rightmost lane (positive while inside it).
struct BoundaryDistances
{
  double left{0.0};
  double right{0.0};
  double preferred_lane{0.0};
};

class AmbiguousProjection : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class OutOfRange : public std::out_of_range
{
public:
  using std::out_of_range::out_of_range;
};

/// Interpolating cubic spline with not-a-knot end conditions.
class CubicSpline
{
public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> knots, std::vector<double> values);

  double value(double u) const;
  double first_derivative(double u) const;
  double second_derivative(double u) const;

  const std::vector<double> & knots() const { return knots_; }

private:
  std::size_t segment(double u) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> moments_;
};

/// C2 reference path built from an ordered list of Cartesian samples. The samples are
/// interpolated by cubic splines in x and y which are re-parameterized until the spline
/// parameter equals the arc length. The path itself lies on the center of the road, so for two
/// lanes it runs along the lane divider.
class ReferencePath
{
public:
  struct Options
  {
    double curvature_jump_threshold{0.05};
    int reparameterization_passes{6};
  };

  ReferencePath(
    std::vector<CartesianPoint> points, int lane_count, double lane_width,
    std::vector<SpeedLimitSegment> speed_limits);
  ReferencePath(
    std::vector<CartesianPoint> points, int lane_count, double lane_width,
    std::vector<SpeedLimitSegment> speed_limits, const Options & options);

  double length() const { return arc_length_.back(); }

  CartesianPoint position(double s) const;
  Eigen::Vector2d first_derivative(double s) const;
  Eigen::Vector2d second_derivative(double s) const;
  Eigen::Vector2d tangent(double s) const;
  Eigen::Vector2d normal(double s) const;
  double heading(double s) const;
  double curvature(double s) const;
  double speed_limit(double s) const;

  int lane_count() const { return lane_count_; }
  double lane_width() const { return lane_width_; }
  double left_edge() const { return 0.5 * lane_count_ * lane_width_; }
  double right_edge() const { return -0.5 * lane_count_ * lane_width_; }
  /// Lateral offset of a lane center; lane 0 is the rightmost lane.
  double lane_center(int lane) const;
  /// Lane index containing the lateral offset d, clamped to the road.
  int lane_of(double d) const;
  double rightmost_lane_left_boundary() const { return right_edge() + lane_width_; }

  const std::vector<CartesianPoint> & samples() const { return samples_; }
  const std::vector<double> & arc_length() const { return arc_length_; }
  const std::vector<double> & headings() const { return heading_; }
  const std::vector<double> & curvatures() const { return curvature_; }
  const std::vector<SpeedLimitSegment> & speed_limits() const { return speed_limits_; }

private:
  std::vector<CartesianPoint> samples_;
  std::vector<double> arc_length_;
  std::vector<double> heading_;
  std::vector<double> curvature_;
  int lane_count_{2};
  double lane_width_{4.0};
  std::vector<SpeedLimitSegment> speed_limits_;
  CubicSpline x_spline_;
  CubicSpline y_spline_;
};

/// Closest-point projection onto the path. Throws AmbiguousProjection when the point lies outside
/// the validity corridor and OutOfRange when the foot point would fall beyond the path ends.
FrenetPoint cartesian_to_frenet(const ReferencePath & path, const CartesianPoint & p);

/// Throws OutOfRange when q.s lies outside [0, length].
CartesianPoint frenet_to_cartesian(const ReferencePath & path, const FrenetPoint & q);

BoundaryDistances boundary_distances(const ReferencePath & path, const FrenetPoint & q);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

}  // namespace tvapf::geometry

#endif  // TVAPF__GEOMETRY_HPP_
