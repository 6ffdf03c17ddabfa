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

#include "tvapf/point_mass_model.hpp"

#include <cmath>

namespace tvapf::planner
{
namespace
{
using Matrix4d = Eigen::Matrix4d;

Matrix4d state_jacobian(const FrenetState & x)
{
  Matrix4d a = Matrix4d::Zero();
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  a(0, 2) = -x(3) * s;
  a(0, 3) = c;
  a(1, 2) = x(3) * c;
  a(1, 3) = s;
  return a;
}

StepJacobian input_columns()
{
  StepJacobian b = StepJacobian::Zero();
  b(3, 4) = 1.0;
  b(2, 5) = 1.0;
  return b;
}
}  // namespace

FrenetState point_mass_derivative(const FrenetState & xi, const ControlInput & lambda)
{
  return {xi(3) * std::cos(xi(2)), xi(3) * std::sin(xi(2)), lambda(1), lambda(0)};
}

FrenetState discretize_dynamics(const FrenetState & xi, const ControlInput & lambda, double T)
{
  const FrenetState k1 = point_mass_derivative(xi, lambda);
  const FrenetState k2 = point_mass_derivative(xi + 0.5 * T * k1, lambda);
  const FrenetState k3 = point_mass_derivative(xi + 0.5 * T * k2, lambda);
  const FrenetState k4 = point_mass_derivative(xi + T * k3, lambda);
  return xi + T / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

FrenetState discretize_dynamics(
  const FrenetState & xi, const ControlInput & lambda, double T, StepJacobian & jacobian)
{
  StepJacobian identity = StepJacobian::Zero();
  identity.leftCols<4>().setIdentity();
  const StepJacobian fu = input_columns();

  const FrenetState x1 = xi;
  const FrenetState k1 = point_mass_derivative(x1, lambda);
  const StepJacobian d1 = state_jacobian(x1) * identity + fu;

  const FrenetState x2 = xi + 0.5 * T * k1;
  const StepJacobian dx2 = identity + 0.5 * T * d1;
  const FrenetState k2 = point_mass_derivative(x2, lambda);
  const StepJacobian d2 = state_jacobian(x2) * dx2 + fu;

  const FrenetState x3 = xi + 0.5 * T * k2;
  const StepJacobian dx3 = identity + 0.5 * T * d2;
  const FrenetState k3 = point_mass_derivative(x3, lambda);
  const StepJacobian d3 = state_jacobian(x3) * dx3 + fu;

  const FrenetState x4 = xi + T * k3;
  const StepJacobian dx4 = identity + T * d3;
  const FrenetState k4 = point_mass_derivative(x4, lambda);
  const StepJacobian d4 = state_jacobian(x4) * dx4 + fu;

  jacobian = identity + T / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
  return xi + T / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StageMatrix dynamics_weighted_hessian(
  const FrenetState & xi, const ControlInput & lambda, double T, const Eigen::Vector4d & w)
{
  // central differences of the analytic gradient of w' f
  StageMatrix h;
  Eigen::Matrix<double, 6, 1> z;
  z << xi, lambda;
  StepJacobian jp;
  StepJacobian jm;
  for (int k = 0; k < 6; ++k) {
    const double step = 1e-6 * std::max(1.0, std::abs(z(k)));
    Eigen::Matrix<double, 6, 1> zp = z;
    Eigen::Matrix<double, 6, 1> zm = z;
    zp(k) += step;
    zm(k) -= step;
    discretize_dynamics(zp.head<4>(), zp.tail<2>(), T, jp);
    discretize_dynamics(zm.head<4>(), zm.tail<2>(), T, jm);
    h.col(k) = (jp - jm).transpose() * w / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

}  // namespace tvapf::planner
