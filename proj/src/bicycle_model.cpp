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

#include "tvapf/bicycle_model.hpp"

#include <cmath>

namespace tvapf::tracker
{
namespace
{
using Matrix5d = Eigen::Matrix<double, 5, 5>;

Matrix5d state_jacobian(const VehicleState & x, double L)
{
  Matrix5d a = Matrix5d::Zero();
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  const double cd = std::cos(x(4));
  a(0, 2) = -x(3) * s;
  a(0, 3) = c;
  a(1, 2) = x(3) * c;
  a(1, 3) = s;
  a(2, 3) = std::tan(x(4)) / L;
  a(2, 4) = x(3) / (L * cd * cd);
  return a;
}
}  // namespace

VehicleState bicycle_derivative(const VehicleState & chi, const VehicleInput & u, double wheelbase)
{
  VehicleState d;
  d << chi(3) * std::cos(chi(2)), chi(3) * std::sin(chi(2)), chi(3) * std::tan(chi(4)) / wheelbase,
    u(0), u(1);
  return d;
}

VehicleState bicycle_step(const VehicleState & chi, const VehicleInput & u, double T, double wheelbase)
{
  const VehicleState k1 = bicycle_derivative(chi, u, wheelbase);
  const VehicleState k2 = bicycle_derivative(chi + 0.5 * T * k1, u, wheelbase);
  const VehicleState k3 = bicycle_derivative(chi + 0.5 * T * k2, u, wheelbase);
  const VehicleState k4 = bicycle_derivative(chi + T * k3, u, wheelbase);
  return chi + T / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

VehicleState bicycle_step(
  const VehicleState & chi, const VehicleInput & u, double T, double wheelbase, BicycleJacobian & jacobian)
{
  BicycleJacobian identity = BicycleJacobian::Zero();
  identity.leftCols<5>().setIdentity();
  BicycleJacobian fu = BicycleJacobian::Zero();
  fu(3, 5) = 1.0;
  fu(4, 6) = 1.0;

  const VehicleState k1 = bicycle_derivative(chi, u, wheelbase);
  const BicycleJacobian d1 = state_jacobian(chi, wheelbase) * identity + fu;
  const VehicleState x2 = chi + 0.5 * T * k1;
  const VehicleState k2 = bicycle_derivative(x2, u, wheelbase);
  const BicycleJacobian d2 = state_jacobian(x2, wheelbase) * (identity + 0.5 * T * d1) + fu;
  const VehicleState x3 = chi + 0.5 * T * k2;
  const VehicleState k3 = bicycle_derivative(x3, u, wheelbase);
  const BicycleJacobian d3 = state_jacobian(x3, wheelbase) * (identity + 0.5 * T * d2) + fu;
  const VehicleState x4 = chi + T * k3;
  const VehicleState k4 = bicycle_derivative(x4, u, wheelbase);
  const BicycleJacobian d4 = state_jacobian(x4, wheelbase) * (identity + T * d3) + fu;

  jacobian = identity + T / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
  return chi + T / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

BicycleHessian bicycle_weighted_hessian(
  const VehicleState & chi, const VehicleInput & u, double T, double wheelbase,
  const Eigen::Matrix<double, 5, 1> & w)
{
  BicycleHessian h;
  Eigen::Matrix<double, 7, 1> z;
  z << chi, u;
  BicycleJacobian jp;
  BicycleJacobian jm;
  for (int k = 0; k < 7; ++k) {
    const double step = 1e-6 * std::max(1.0, std::abs(z(k)));
    Eigen::Matrix<double, 7, 1> zp = z;
    Eigen::Matrix<double, 7, 1> zm = z;
    zp(k) += step;
    zm(k) -= step;
    bicycle_step(zp.head<5>(), zp.tail<2>(), T, wheelbase, jp);
    bicycle_step(zm.head<5>(), zm.tail<2>(), T, wheelbase, jm);
    h.col(k) = (jp - jm).transpose() * w / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

}  // namespace tvapf::tracker
