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

#ifndef TVAPF__QP_SOLVER_HPP_
#define TVAPF__QP_SOLVER_HPP_

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace tvapf::solver
{

using SparseMatrix = Eigen::SparseMatrix<double>;

/// min 0.5 x'Hx + q'x  s.t.  A x = b,  C x <= d,  lower <= x <= upper.
/// H must be symmetric positive semidefinite; only its lower triangle is read.
struct QpProblem
{
  SparseMatrix H;
  Eigen::VectorXd q;
  SparseMatrix A;
  Eigen::VectorXd b;
  SparseMatrix C;
  Eigen::VectorXd d;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct QpOptions
{
  double tol{1e-10};
  int max_iter{200};
  /// When positive, the general constraints are relaxed with l1-penalized slacks of this weight,
  /// which makes the problem feasible whenever the bounds are.
  double elastic_penalty{0.0};
};

enum class QpStatus { Optimal, MaxIterations };

struct QpResult
{
  QpStatus status{QpStatus::MaxIterations};
  Eigen::VectorXd x;
  /// Multipliers for the Lagrangian f + y_eq'(Ax - b) + y_in'(Cx - d) - z_lower'(x - l) - z_upper'(u - x).
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_in;
  Eigen::VectorXd z_lower;
  Eigen::VectorXd z_upper;
  /// l1 norm of the elastic slacks at the solution (zero in the hard-constrained mode).
  double elastic_violation{0.0};
  double objective{0.0};
  int iterations{0};
};

/// Mehrotra predictor-corrector interior point method on the sparse quasi-definite augmented
/// system. Bounds must satisfy lower < upper componentwise.
QpResult solve_qp(const QpProblem & qp, const Eigen::VectorXd & x_guess, const QpOptions & options);

}  // namespace tvapf::solver

#endif  // TVAPF__QP_SOLVER_HPP_
