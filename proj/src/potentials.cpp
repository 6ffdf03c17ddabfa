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

#include "tvapf/potentials.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tvapf::potentials
{
namespace
{
// exp(-(eta h)^4) and its first two derivatives with respect to h.
Taylor1 quartic_gaussian(double h, double eta)
{
  const double e4 = std::pow(eta, 4);
  const double h2 = h * h;
  const double g = std::exp(-e4 * h2 * h2);
  const double dg = -4.0 * e4 * h2 * h * g;
  const double ddg = (-12.0 * e4 * h2 + 16.0 * e4 * e4 * h2 * h2 * h2) * g;
  return {g, dg, ddg};
}

double logistic(double x)
{
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

void validate(const PotentialConfig & config)
{
  if (!(config.eta > 0.0) || !std::isfinite(config.eta)) {
    throw std::invalid_argument(fmt::format("eta must be positive, got {}", config.eta));
  }
  if (!(config.a_l_max > 0.0)) {
    throw std::invalid_argument(fmt::format("a_l_max must be positive, got {}", config.a_l_max));
  }
  if (!(config.v_des > 0.0)) {
    throw std::invalid_argument(fmt::format("v_des must be positive, got {}", config.v_des));
  }
  for (double w : {config.K_v, config.K_b, config.K_l, config.K_c}) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument(fmt::format("cost weights must be finite and >= 0, got {}", w));
    }
  }
}

double effective_speed(double v_des, double v_max, double kappa_eff, double a_l_max)
{
  const double k = std::abs(kappa_eff);
  const double curve_limit =
    k > 0.0 ? std::sqrt(a_l_max / k) : std::numeric_limits<double>::infinity();
  return std::min({v_des, v_max, curve_limit});
}

double speed_cost(double v, double v_bar)
{
  return (v - v_bar) * (v - v_bar);
}

Taylor1 speed_cost_taylor(double v, double v_bar)
{
  return {speed_cost(v, v_bar), 2.0 * (v - v_bar), 2.0};
}

double boundary_potential(double h_l, double h_r, double eta)
{
  return std::exp(-std::pow(eta * h_l, 4)) + std::exp(-std::pow(eta * h_r, 4));
}

Taylor1 boundary_potential_taylor(double h_l, double h_r, double eta)
{
  const Taylor1 left = quartic_gaussian(h_l, eta);
  const Taylor1 right = quartic_gaussian(h_r, eta);
  return {left.value + right.value, -left.first + right.first, left.second + right.second};
}

double lane_potential(double h_c)
{
  return logistic(-h_c);
}

Taylor1 lane_potential_taylor(double h_c)
{
  const double w = logistic(-h_c);
  // dW/dh_c = -w(1-w); dh_c/dd = -1
  const double first = w * (1.0 - w);
  const double second = first * (1.0 - 2.0 * w);
  return {w, first, second};
}

double comfort_cost(double nu, double omega)
{
  const double a = nu * omega;
  return a * a;
}

Taylor2 comfort_cost_taylor(double nu, double omega)
{
  Taylor2 t;
  t.value = comfort_cost(nu, omega);
  t.gradient << 2.0 * nu * omega * omega, 2.0 * nu * nu * omega;
  t.hessian << 2.0 * omega * omega, 4.0 * nu * omega, 4.0 * nu * omega, 2.0 * nu * nu;
  return t;
}

Taylor1 lateral_cost(double d, const LaneGeometry & lanes, double eta, double K_b, double K_l)
{
  const Taylor1 b = boundary_potential_taylor(lanes.left_edge - d, d - lanes.right_edge, eta);
  const Taylor1 l = lane_potential_taylor(lanes.preferred_boundary - d);
  return {
    K_b * b.value + K_l * l.value, K_b * b.first + K_l * l.first, K_b * b.second + K_l * l.second};
}

double calibrate_eta(const LaneGeometry & lanes, double K_b, double K_l)
{
  if (!(K_b > 0.0) || !(K_l > 0.0)) {
    throw std::invalid_argument("eta calibration needs K_b > 0 and K_l > 0");
  }
  const auto slope = [&](double eta) { return lateral_cost(lanes.target, lanes, eta, K_b, K_l).first; };
  // For a large eta the boundary field vanishes at the target and the lane field pulls right,
  // so the slope is positive there. Walk down until the boundary push wins.
  double hi = 20.0;
  if (!(slope(hi) > 0.0)) {
    throw std::invalid_argument("eta calibration: lane field does not dominate for large eta");
  }
  double lo = hi;
  bool bracketed = false;
  for (int i = 0; i < 4000; ++i) {
    lo = hi * 0.995;
    if (slope(lo) < 0.0) {
      bracketed = true;
      break;
    }
    hi = lo;
  }
  if (!bracketed) {
    throw std::invalid_argument(fmt::format(
      "eta calibration: no eta centers the lateral cost at d={} with K_b={} K_l={}", lanes.target,
      K_b, K_l));
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  const double eta = 0.5 * (lo + hi);
  if (!(lateral_cost(lanes.target, lanes, eta, K_b, K_l).second > 0.0)) {
    throw std::invalid_argument("eta calibration: stationary point is not a minimum");
  }
  return eta;
}

}  // namespace tvapf::potentials
