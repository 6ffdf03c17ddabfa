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

#ifndef TVAPF__POINT_MASS_MODEL_HPP_
#define TVAPF__POINT_MASS_MODEL_HPP_

#include <Eigen/Core>

namespace tvapf::planner
{

/// xi = [s, d, psi, nu]
using FrenetState = Eigen::Vector4d;
/// lambda = [alpha, omega]
using ControlInput = Eigen::Vector2d;
using StepJacobian = Eigen::Matrix<double, 4, 6>;
using StageMatrix = Eigen::Matrix<double, 6, 6>;

FrenetState point_mass_derivative(const FrenetState & xi, const ControlInput & lambda);

/// One RK4 step with the input held over T.
FrenetState discretize_dynamics(const FrenetState & xi, const ControlInput & lambda, double T);

/// RK4 step together with its Jacobian with respect to [xi, lambda].
FrenetState discretize_dynamics(
  const FrenetState & xi, const ControlInput & lambda, double T, StepJacobian & jacobian);

/// Sum_i w_i * Hessian of the i-th component of the RK4 step with respect to [xi, lambda].
StageMatrix dynamics_weighted_hessian(
  const FrenetState & xi, const ControlInput & lambda, double T, const Eigen::Vector4d & w);

}  // namespace tvapf::planner

#endif  // TVAPF__POINT_MASS_MODEL_HPP_
