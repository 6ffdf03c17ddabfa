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

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace tvapf::geometry
{
namespace
{
constexpr std::array<double, 5> kGaussNodes{
  0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{
  0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
  0.2369268850561891};

constexpr double kTieTolerance = 1e-9;
constexpr double kEndTolerance = 1e-9;

double segment_arc_length(const CubicSpline & xs, const CubicSpline & ys, double u0, double u1)
{
  const double half = 0.5 * (u1 - u0);
  const double mid = 0.5 * (u1 + u0);
  double total = 0.0;
  for (std::size_t k = 0; k < kGaussNodes.size(); ++k) {
    const double u = mid + half * kGaussNodes[k];
    total += kGaussWeights[k] * std::hypot(xs.first_derivative(u), ys.first_derivative(u));
  }
  return total * half;
}

struct Projection
{
  double s{0.0};
  double distance{0.0};
};

Projection refine_projection(
  const ReferencePath & path, const Eigen::Vector2d & p, double s0, double lo, double hi)
{
  double s = std::clamp(s0, lo, hi);
  for (int iter = 0; iter < 50; ++iter) {
    const CartesianPoint r = path.position(s);
    const Eigen::Vector2d diff(r.x - p.x(), r.y - p.y());
    const Eigen::Vector2d d1 = path.first_derivative(s);
    const Eigen::Vector2d d2 = path.second_derivative(s);
    const double grad = diff.dot(d1);
    double hess = d1.squaredNorm() + diff.dot(d2);
    if (hess <= 1e-12) {
      hess = d1.squaredNorm();
    }
    double step = -grad / hess;
    const double max_step = 0.5 * (hi - lo) + 1e-12;
    step = std::clamp(step, -max_step, max_step);
    const double next = std::clamp(s + step, lo, hi);
    if (std::abs(next - s) < 1e-13 * std::max(1.0, std::abs(s))) {
      s = next;
      break;
    }
    s = next;
  }
  const CartesianPoint r = path.position(s);
  return {s, std::hypot(p.x() - r.x, p.y() - r.y)};
}
}  // namespace

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values)
: knots_(std::move(knots)), values_(std::move(values))
{
  const std::size_t count = knots_.size();
  if (count < 2 || values_.size() != count) {
    throw std::invalid_argument("CubicSpline needs at least two knots and matching values");
  }
  for (std::size_t i = 1; i < count; ++i) {
    if (!(knots_[i] > knots_[i - 1])) {
      throw std::invalid_argument("CubicSpline knots must be strictly increasing");
    }
  }
  moments_.assign(count, 0.0);
  if (count == 2) {
    return;
  }
  std::vector<double> h(count - 1);
  std::vector<double> slope(count - 1);
  for (std::size_t i = 0; i + 1 < count; ++i) {
    h[i] = knots_[i + 1] - knots_[i];
    slope[i] = (values_[i + 1] - values_[i]) / h[i];
  }
  if (count == 3) {
    // single parabola through three points
    const double m = 6.0 * (slope[1] - slope[0]) / (3.0 * (h[0] + h[1]));
    moments_.assign(3, m);
    return;
  }

  const auto n = static_cast<int>(count);
  Eigen::SparseMatrix<double> system(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(3 * n));
  entries.emplace_back(0, 0, h[1]);
  entries.emplace_back(0, 1, -(h[0] + h[1]));
  entries.emplace_back(0, 2, h[0]);
  for (int i = 1; i + 1 < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    entries.emplace_back(i, i - 1, h[iu - 1]);
    entries.emplace_back(i, i, 2.0 * (h[iu - 1] + h[iu]));
    entries.emplace_back(i, i + 1, h[iu]);
    rhs(i) = 6.0 * (slope[iu] - slope[iu - 1]);
  }
  const auto last = static_cast<std::size_t>(n - 1);
  entries.emplace_back(n - 1, n - 3, h[last - 1]);
  entries.emplace_back(n - 1, n - 2, -(h[last - 2] + h[last - 1]));
  entries.emplace_back(n - 1, n - 1, h[last - 2]);
  system.setFromTriplets(entries.begin(), entries.end());

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) {
    throw std::invalid_argument("CubicSpline system is singular");
  }
  const Eigen::VectorXd m = lu.solve(rhs);
  for (int i = 0; i < n; ++i) {
    moments_[static_cast<std::size_t>(i)] = m(i);
  }
}

std::size_t CubicSpline::segment(double u) const
{
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
  if (it == knots_.begin()) {
    return 0;
  }
  const auto idx = static_cast<std::size_t>(std::distance(knots_.begin(), it)) - 1;
  return std::min(idx, knots_.size() - 2);
}

double CubicSpline::value(double u) const
{
  const std::size_t i = segment(u);
  const double h = knots_[i + 1] - knots_[i];
  const double a = knots_[i + 1] - u;
  const double b = u - knots_[i];
  return moments_[i] * a * a * a / (6.0 * h) + moments_[i + 1] * b * b * b / (6.0 * h) +
         (values_[i] / h - moments_[i] * h / 6.0) * a +
         (values_[i + 1] / h - moments_[i + 1] * h / 6.0) * b;
}

double CubicSpline::first_derivative(double u) const
{
  const std::size_t i = segment(u);
  const double h = knots_[i + 1] - knots_[i];
  const double a = knots_[i + 1] - u;
  const double b = u - knots_[i];
  return -moments_[i] * a * a / (2.0 * h) + moments_[i + 1] * b * b / (2.0 * h) -
         (values_[i] / h - moments_[i] * h / 6.0) + (values_[i + 1] / h - moments_[i + 1] * h / 6.0);
}

double CubicSpline::second_derivative(double u) const
{
  const std::size_t i = segment(u);
  const double h = knots_[i + 1] - knots_[i];
  return (moments_[i] * (knots_[i + 1] - u) + moments_[i + 1] * (u - knots_[i])) / h;
}

ReferencePath::ReferencePath(
  std::vector<CartesianPoint> points, int lane_count, double lane_width,
  std::vector<SpeedLimitSegment> speed_limits)
: ReferencePath(std::move(points), lane_count, lane_width, std::move(speed_limits), Options{})
{
}

ReferencePath::ReferencePath(
  std::vector<CartesianPoint> points, int lane_count, double lane_width,
  std::vector<SpeedLimitSegment> speed_limits, const Options & options)
: samples_(std::move(points)),
  lane_count_(lane_count),
  lane_width_(lane_width),
  speed_limits_(std::move(speed_limits))
{
  if (samples_.size() < 2) {
    throw std::invalid_argument("reference path needs at least two samples");
  }
  if (lane_count_ < 1 || !(lane_width_ > 0.0)) {
    throw std::invalid_argument("reference path needs lane_count >= 1 and lane_width > 0");
  }
  if (speed_limits_.empty()) {
    throw std::invalid_argument("reference path needs at least one speed limit segment");
  }
  for (std::size_t i = 0; i < speed_limits_.size(); ++i) {
    if (!(speed_limits_[i].speed_limit > 0.0)) {
      throw std::invalid_argument("speed limits must be positive");
    }
    if (i > 0 && !(speed_limits_[i].s_start > speed_limits_[i - 1].s_start)) {
      throw std::invalid_argument("speed limit segments must be sorted by s_start");
    }
  }

  const std::size_t count = samples_.size();
  std::vector<double> xs(count);
  std::vector<double> ys(count);
  std::vector<double> u(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    xs[i] = samples_[i].x;
    ys[i] = samples_[i].y;
    if (i > 0) {
      const double chord = std::hypot(xs[i] - xs[i - 1], ys[i] - ys[i - 1]);
      if (!(chord > 0.0)) {
        throw std::invalid_argument(fmt::format("reference path samples {} and {} coincide", i - 1, i));
      }
      u[i] = u[i - 1] + chord;
    }
  }

  for (int pass = 0; pass <= options.reparameterization_passes; ++pass) {
    x_spline_ = CubicSpline(u, xs);
    y_spline_ = CubicSpline(u, ys);
    if (pass == options.reparameterization_passes) {
      break;
    }
    std::vector<double> next(count, 0.0);
    for (std::size_t i = 1; i < count; ++i) {
      next[i] = next[i - 1] + segment_arc_length(x_spline_, y_spline_, u[i - 1], u[i]);
    }
    u = std::move(next);
  }
  arc_length_ = u;

  heading_.resize(count);
  curvature_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    heading_[i] = heading(arc_length_[i]);
    curvature_[i] = curvature(arc_length_[i]);
    if (i > 0 && std::abs(curvature_[i] - curvature_[i - 1]) > options.curvature_jump_threshold) {
      throw std::invalid_argument(fmt::format(
        "reference path curvature jumps by {:.4f} 1/m between samples {} and {}",
        std::abs(curvature_[i] - curvature_[i - 1]), i - 1, i));
    }
  }
}

CartesianPoint ReferencePath::position(double s) const
{
  return {x_spline_.value(s), y_spline_.value(s)};
}

Eigen::Vector2d ReferencePath::first_derivative(double s) const
{
  return {x_spline_.first_derivative(s), y_spline_.first_derivative(s)};
}

Eigen::Vector2d ReferencePath::second_derivative(double s) const
{
  return {x_spline_.second_derivative(s), y_spline_.second_derivative(s)};
}

Eigen::Vector2d ReferencePath::tangent(double s) const
{
  return first_derivative(s).normalized();
}

Eigen::Vector2d ReferencePath::normal(double s) const
{
  const Eigen::Vector2d t = tangent(s);
  return {-t.y(), t.x()};
}

double ReferencePath::heading(double s) const
{
  const Eigen::Vector2d d1 = first_derivative(s);
  return std::atan2(d1.y(), d1.x());
}

double ReferencePath::curvature(double s) const
{
  const Eigen::Vector2d d1 = first_derivative(s);
  const Eigen::Vector2d d2 = second_derivative(s);
  const double speed = d1.norm();
  return (d1.x() * d2.y() - d1.y() * d2.x()) / (speed * speed * speed);
}

double ReferencePath::speed_limit(double s) const
{
  double limit = speed_limits_.front().speed_limit;
  for (const auto & segment : speed_limits_) {
    if (s >= segment.s_start) {
      limit = segment.speed_limit;
    }
  }
  return limit;
}

double ReferencePath::lane_center(int lane) const
{
  return right_edge() + (lane + 0.5) * lane_width_;
}

int ReferencePath::lane_of(double d) const
{
  const auto lane = static_cast<int>(std::floor((d - right_edge()) / lane_width_));
  return std::clamp(lane, 0, lane_count_ - 1);
}

FrenetPoint cartesian_to_frenet(const ReferencePath & path, const CartesianPoint & p)
{
  const Eigen::Vector2d query(p.x, p.y);
  const auto & samples = path.samples();
  const auto & knots = path.arc_length();
  const std::size_t count = samples.size();

  std::vector<double> dist(count);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    dist[i] = std::hypot(samples[i].x - p.x, samples[i].y - p.y);
    best = std::min(best, dist[i]);
  }
  double max_spacing = 0.0;
  for (std::size_t i = 1; i < count; ++i) {
    max_spacing = std::max(max_spacing, knots[i] - knots[i - 1]);
  }

  // Refine every local minimum of the sampled distance that can still compete with the best.
  std::vector<Projection> candidates;
  for (std::size_t i = 0; i < count; ++i) {
    const bool left_ok = i == 0 || dist[i] <= dist[i - 1];
    const bool right_ok = i + 1 == count || dist[i] <= dist[i + 1];
    if (!left_ok || !right_ok || dist[i] > best + max_spacing) {
      continue;
    }
    const double lo = knots[i == 0 ? 0 : i - 1];
    const double hi = knots[std::min(i + 1, count - 1)];
    candidates.push_back(refine_projection(path, query, knots[i], lo, hi));
  }
  std::sort(candidates.begin(), candidates.end(), [](const Projection & a, const Projection & b) {
    return a.distance < b.distance;
  });
  const Projection foot = candidates.front();
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const Projection & other = candidates[k];
    if (
      std::abs(other.distance - foot.distance) <= kTieTolerance &&
      std::abs(other.s - foot.s) > 1e-6 * std::max(1.0, path.length())) {
      throw AmbiguousProjection(fmt::format(
        "point ({:.6f}, {:.6f}) projects onto s={:.6f} and s={:.6f} at equal distance", p.x, p.y,
        foot.s, other.s));
    }
  }

  const CartesianPoint r = path.position(foot.s);
  const Eigen::Vector2d offset(p.x - r.x, p.y - r.y);
  const double along = offset.dot(path.tangent(foot.s));
  if (
    (foot.s <= 0.0 || foot.s >= path.length()) &&
    std::abs(along) > kEndTolerance * std::max(1.0, offset.norm())) {
    throw OutOfRange(fmt::format(
      "point ({:.6f}, {:.6f}) projects beyond the path end (s={:.6f})", p.x, p.y, foot.s));
  }
  const double d = offset.dot(path.normal(foot.s));
  const double kappa = path.curvature(foot.s);
  if (std::abs(d * kappa) >= 1.0) {
    throw AmbiguousProjection(fmt::format(
      "point ({:.6f}, {:.6f}) lies outside the validity corridor at s={:.6f}", p.x, p.y, foot.s));
  }
  return {foot.s, d};
}

CartesianPoint frenet_to_cartesian(const ReferencePath & path, const FrenetPoint & q)
{
  if (q.s < 0.0 || q.s > path.length()) {
    throw OutOfRange(fmt::format("s={:.6f} outside [0, {:.6f}]", q.s, path.length()));
  }
  const CartesianPoint r = path.position(q.s);
  const Eigen::Vector2d n = path.normal(q.s);
  return {r.x + q.d * n.x(), r.y + q.d * n.y()};
}

BoundaryDistances boundary_distances(const ReferencePath & path, const FrenetPoint & q)
{
  return {
    path.left_edge() - q.d, q.d - path.right_edge(), path.rightmost_lane_left_boundary() - q.d};
}

double wrap_angle(double angle)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle + std::numbers::pi, two_pi);
  if (wrapped <= 0.0) {
    wrapped += two_pi;
  }
  return wrapped - std::numbers::pi;
}

}  // namespace tvapf::geometry
