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

#ifndef TVAPF__SQP_SOLVER_HPP_
#define TVAPF__SQP_SOLVER_HPP_

#include "tvapf/qp_solver.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvapf::solver
{

class CallbackFailure : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Smooth NLP: min f(z) s.t. g(z) = 0, h(z) <= 0, lower <= z <= upper.
struct NlpProblem
{
  int n_vars{0};
  int n_eq{0};
  int n_ineq{0};
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd z0;

  std::function<double(const Eigen::VectorXd &)> objective;
  std::function<void(const Eigen::VectorXd &, Eigen::VectorXd &)> gradient;
  std::function<void(const Eigen::VectorXd &, Eigen::VectorXd &)> equalities;
  std::function<void(const Eigen::VectorXd &, SparseMatrix &)> equality_jacobian;
  std::function<void(const Eigen::VectorXd &, Eigen::VectorXd &)> inequalities;
  std::function<void(const Eigen::VectorXd &, SparseMatrix &)> inequality_jacobian;

  /// Sizes of the diagonal blocks of the Lagrangian Hessian; empty means one dense block.
  std::vector<int> hessian_blocks;
  /// Optional exact Lagrangian Hessian, one dense block per entry of hessian_blocks. Damped BFGS
  /// per block is used when absent.
  std::function<void(
    const Eigen::VectorXd & z, const Eigen::VectorXd & y_eq, const Eigen::VectorXd & y_in,
    std::vector<Eigen::MatrixXd> & blocks)>
    lagrangian_hessian;
};

struct SolveOptions
{
  double tol{1e-6};
  int max_iter{200};
  double max_wall_time{std::numeric_limits<double>::infinity()};
  double initial_penalty{10.0};
  double max_penalty{1e8};
  std::ostream * log{nullptr};
};

enum class SolveStatus { Optimal, FeasiblePoint, Infeasible, IterLimit };

std::string to_string(SolveStatus status);

struct IterationRecord
{
  int iteration{0};
  double objective{0.0};
  double violation{0.0};
  double merit{0.0};
  double step_size{0.0};
  double penalty{0.0};
};

struct SolveResult
{
  Eigen::VectorXd z;
  double objective{0.0};
  SolveStatus status{SolveStatus::IterLimit};
  int iterations{0};
  double wall_time{0.0};
  double constraint_violation{0.0};
  double kkt_residual{0.0};
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_in;
  std::vector<IterationRecord> history;
};

/// Sl1QP-style SQP with an l1 merit line search and second-order correction.
SolveResult solve(const NlpProblem & problem, const SolveOptions & options = {});

}  // namespace tvapf::solver

#endif  // TVAPF__SQP_SOLVER_HPP_
