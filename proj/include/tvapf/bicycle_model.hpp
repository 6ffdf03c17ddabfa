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

#ifndef TVAPF__BICYCLE_MODEL_HPP_
#define TVAPF__BICYCLE_MODEL_HPP_

#include <Eigen/Core>

namespace tvapf::tracker
{

/// chi = [x, y, theta, v, delta]
using VehicleState = Eigen::Matrix<double, 5, 1>;
/// u = [a, w_delta]
using VehicleInput = Eigen::Vector2d;
using BicycleJacobian = Eigen::Matrix<double, 5, 7>;
using BicycleHessian = Eigen::Matrix<double, 7, 7>;

VehicleState bicycle_derivative(const VehicleState & chi, const VehicleInput & u, double wheelbase);

/// One RK4 step with the input held over T.
VehicleState bicycle_step(const VehicleState & chi, const VehicleInput & u, double T, double wheelbase);

/// RK4 step together with its Jacobian with respect to [chi, u].
VehicleState bicycle_step(
  const VehicleState & chi, const VehicleInput & u, double T, double wheelbase, BicycleJacobian & jacobian);

/// Sum_i w_i * Hessian of the i-th component of the RK4 step with respect to [chi, u].
BicycleHessian bicycle_weighted_hessian(
  const VehicleState & chi, const VehicleInput & u, double T, double wheelbase,
  const Eigen::Matrix<double, 5, 1> & w);

}  // namespace tvapf::tracker

#endif  // TVAPF__BICYCLE_MODEL_HPP_
