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

#ifndef TVAPF__POTENTIALS_HPP_
#define TVAPF__POTENTIALS_HPP_

#include <Eigen/Core>

namespace tvapf::potentials
{

struct PotentialConfig
{
  double eta{0.82};
  double a_l_max{1.0};
  double v_des{12.0};
  double K_v{1.0};
  double K_b{50.0};
  double K_l{5.0};
  double K_c{2.0};
};

/// Throws std::invalid_argument when a field is out of range.
void validate(const PotentialConfig & config);

/// Value with first and second derivative along one scalar argument.
struct Taylor1
{
  double value{0.0};
  double first{0.0};
  double second{0.0};
};

struct Taylor2
{
  double value{0.0};
  Eigen::Vector2d gradient{Eigen::Vector2d::Zero()};
  Eigen::Matrix2d hessian{Eigen::Matrix2d::Zero()};
};

double effective_speed(double v_des, double v_max, double kappa_eff, double a_l_max);

double speed_cost(double v, double v_bar);
/// Derivatives with respect to v.
Taylor1 speed_cost_taylor(double v, double v_bar);

double boundary_potential(double h_l, double h_r, double eta);
/// Derivatives with respect to the lateral offset d, using h_l = left - d and h_r = d - right.
Taylor1 boundary_potential_taylor(double h_l, double h_r, double eta);

double lane_potential(double h_c);
/// Derivatives with respect to d, using h_c = boundary - d.
Taylor1 lane_potential_taylor(double h_c);

double comfort_cost(double nu, double omega);
/// Derivatives with respect to (nu, omega).
Taylor2 comfort_cost_taylor(double nu, double omega);

/// Lateral geometry seen by the static fields, in path-relative offsets.
struct LaneGeometry
{
  double left_edge{4.0};
  double right_edge{-4.0};
  double preferred_boundary{0.0};
  double target{-2.0};
};

/// Static lateral cost K_b W_b + K_l W_l as a function of d.
Taylor1 lateral_cost(double d, const LaneGeometry & lanes, double eta, double K_b, double K_l);

/// Chooses eta so that the lateral cost has a strict local minimum at lanes.target. Throws
/// std::invalid_argument when no such eta exists for the given weights.
double calibrate_eta(const LaneGeometry & lanes, double K_b, double K_l);

}  // namespace tvapf::potentials

#endif  // TVAPF__POTENTIALS_HPP_
