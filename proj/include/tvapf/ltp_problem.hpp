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

#ifndef TVAPF__LTP_PROBLEM_HPP_
#define TVAPF__LTP_PROBLEM_HPP_

#include "tvapf/geometry.hpp"
#include "tvapf/point_mass_model.hpp"
#include "tvapf/potentials.hpp"
#include "tvapf/prediction.hpp"
#include "tvapf/sqp_solver.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace tvapf::planner
{

using prediction::Interval;

struct TerminalParams
{
  double tau{0.5};
  double j_max{0.9};
  double alpha_min{-0.9};
  double nu_ter{8.0};
  double eps_d{0.3};
  double eps_psi{0.05};
};

struct PlannerConfig
{
  double T_s{0.5};
  int N{70};
  double instance_period{5.0};
  Interval d_bounds{-3.2, 3.2};
  Interval psi_bounds{-0.5, 0.5};
  Interval nu_bounds{0.0, 12.5};
  Interval alpha_bounds{-0.9, 0.9};
  Interval omega_bounds{-0.06, 0.06};
  /// Change of the inputs between consecutive steps.
  Interval d_alpha_bounds{-0.45, 0.45};
  Interval d_omega_bounds{-0.02, 0.02};
  TerminalParams terminal;
  double K_o{20.0};
  int max_iterations{80};
};

/// Throws std::invalid_argument when the configuration is inconsistent.
void validate(const PlannerConfig & config);

struct TerminalBox
{
  double s_max{0.0};
  double d_center{0.0};
  double eps_d{0.0};
  double eps_psi{0.0};
  double nu_max{0.0};
  double braking_distance{0.0};
  /// Empty when s_max is set by the path end.
  std::string leader_id;
};

/// Direct multiple shooting transcription of the local trajectory planning problem. The
/// decision vector is [xi_0, lambda_0, xi_1, lambda_1, ..., xi_N].
class LtpProblem
{
public:
  LtpProblem(
    const geometry::ReferencePath & path, const FrenetState & xi0,
    std::vector<prediction::UncertainForecast> forecasts, const prediction::TvapfParams & tvapf,
    const potentials::PotentialConfig & potentials, const PlannerConfig & config,
    std::vector<double> v_bar, const TerminalBox & terminal);

  LtpProblem(const LtpProblem &) = delete;
  LtpProblem & operator=(const LtpProblem &) = delete;

  const solver::NlpProblem & nlp() const { return nlp_; }
  int num_variables() const { return nlp_.n_vars; }
  int N() const { return config_.N; }
  static int state_offset(int j) { return 6 * j; }
  static int input_offset(int j) { return 6 * j + 4; }

  Eigen::VectorXd pack(const std::vector<FrenetState> & states, const std::vector<ControlInput> & inputs) const;
  void unpack(const Eigen::VectorXd & z, std::vector<FrenetState> & states, std::vector<ControlInput> & inputs) const;

  double objective(const Eigen::VectorXd & z) const;
  void gradient(const Eigen::VectorXd & z, Eigen::VectorXd & g) const;
  void equalities(const Eigen::VectorXd & z, Eigen::VectorXd & c) const;
  void equality_jacobian(const Eigen::VectorXd & z, solver::SparseMatrix & J) const;
  void inequalities(const Eigen::VectorXd & z, Eigen::VectorXd & c) const;
  void inequality_jacobian(const Eigen::VectorXd & z, solver::SparseMatrix & J) const;
  void lagrangian_hessian(
    const Eigen::VectorXd & z, const Eigen::VectorXd & y_eq, const Eigen::VectorXd & y_in,
    std::vector<Eigen::MatrixXd> & blocks) const;

  /// Total obstacle field at prediction step j.
  prediction::FieldTaylor obstacle_field(int j, double s, double d) const;

private:
  struct ObstacleStep
  {
    double s_o;
    double d_o;
    prediction::Scales scales;
  };

  // Cost of stage j with gradient and Hessian over its [xi, lambda] (lambda part zero at j = N).
  double stage_cost(
    int j, const Eigen::VectorXd & z, Eigen::Matrix<double, 6, 1> * grad, StageMatrix * hess) const;
  void build_nlp();

  const geometry::ReferencePath & path_;
  FrenetState xi0_;
  prediction::TvapfParams tvapf_;
  potentials::PotentialConfig potentials_;
  potentials::LaneGeometry lanes_;
  PlannerConfig config_;
  std::vector<double> v_bar_;
  TerminalBox terminal_;
  std::vector<std::vector<ObstacleStep>> obstacle_steps_;
  int n_obstacle_rows_{0};
  solver::NlpProblem nlp_;
};

}  // namespace tvapf::planner

#endif  // TVAPF__LTP_PROBLEM_HPP_
