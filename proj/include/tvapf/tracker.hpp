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

#ifndef TVAPF__TRACKER_HPP_
#define TVAPF__TRACKER_HPP_

#include "tvapf/bicycle_model.hpp"
#include "tvapf/ltp_problem.hpp"
#include "tvapf/sqp_solver.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace tvapf::tracker
{

using prediction::Interval;

struct TrackerConfig
{
  double T_s{0.2};
  int N{10};
  Eigen::Matrix<double, 5, 1> Q{(Eigen::Matrix<double, 5, 1>() << 10.0, 10.0, 5.0, 2.0, 0.1).finished()};
  Eigen::Vector2d R{0.5, 0.5};
  double rho{1000.0};
  double wheelbase{2.7};
  /// Half widths of the admissible tracking error box on x, y, theta and v.
  Eigen::Vector4d e_bounds{0.5, 0.5, 0.1, 1.0};
  Interval a_bounds{-0.88, 0.88};
  Interval w_bounds{-0.2, 0.2};
  Interval da_bounds{-0.18, 0.18};
  Interval dw_bounds{-0.05, 0.05};
  double delta_max{0.42760566};
  double yaw_rate_max{0.07749262};
  /// Slack values at or below this count as zero.
  double sigma_zero{1e-4};
  int max_iterations{30};
};

/// Throws std::invalid_argument on an inconsistent configuration.
void validate(const TrackerConfig & config);

/// Throws std::invalid_argument unless the tracker acceleration limits lie strictly inside the
/// planner acceleration limits.
void check_input_consistency(const TrackerConfig & tracker, const planner::PlannerConfig & planner);

/// Inputs implied by consecutive reference states.
std::vector<VehicleInput> reference_inputs(const std::vector<VehicleState> & ref, double T_s);

/// Multiple shooting transcription of the tracking problem. The decision vector is
/// [chi_0, u_0, ..., chi_{N-1}, u_{N-1}, chi_N, sigma].
class NmpcProblem
{
public:
  NmpcProblem(
    const TrackerConfig & config, const VehicleState & chi0, std::vector<VehicleState> ref,
    const VehicleInput & u_prev);

  NmpcProblem(const NmpcProblem &) = delete;
  NmpcProblem & operator=(const NmpcProblem &) = delete;

  const solver::NlpProblem & nlp() const { return nlp_; }
  const std::vector<VehicleState> & reference() const { return ref_; }
  static int state_offset(int k) { return 7 * k; }
  static int input_offset(int k) { return 7 * k + 5; }
  int sigma_offset() const { return 7 * config_.N + 5; }

  double objective(const Eigen::VectorXd & z) const;
  void gradient(const Eigen::VectorXd & z, Eigen::VectorXd & g) const;
  void equalities(const Eigen::VectorXd & z, Eigen::VectorXd & c) const;
  void equality_jacobian(const Eigen::VectorXd & z, solver::SparseMatrix & J) const;
  void inequalities(const Eigen::VectorXd & z, Eigen::VectorXd & c) const;
  void inequality_jacobian(const Eigen::VectorXd & z, solver::SparseMatrix & J) const;
  void lagrangian_hessian(
    const Eigen::VectorXd & z, const Eigen::VectorXd & y_eq, const Eigen::VectorXd & y_in,
    std::vector<Eigen::MatrixXd> & blocks) const;

private:
  VehicleState error(const Eigen::VectorXd & z, int k) const;
  void build_nlp();

  TrackerConfig config_;
  VehicleState chi0_;
  std::vector<VehicleState> ref_;
  std::vector<VehicleInput> u_ref_;
  VehicleInput u_prev_;
  solver::NlpProblem nlp_;
};

struct TrackerResult
{
  VehicleInput u0{VehicleInput::Zero()};
  std::vector<VehicleState> predicted;
  std::vector<VehicleInput> inputs;
  double sigma{0.0};
  bool infeasible{false};
  std::string status;
  int iterations{0};
  double wall_time{0.0};
};

/// Receding-horizon tracker holding the previous applied input and solution for warm starts.
class Tracker
{
public:
  Tracker(const TrackerConfig & config, const planner::PlannerConfig & planner);

  /// ref holds N + 1 reference states on the tracker grid starting at the current time.
  TrackerResult step(const VehicleState & chi0, const std::vector<VehicleState> & ref);

  void reset(const VehicleInput & u_prev = VehicleInput::Zero());
  const VehicleInput & previous_input() const { return u_prev_; }
  const TrackerConfig & config() const { return config_; }

private:
  TrackerConfig config_;
  VehicleInput u_prev_{VehicleInput::Zero()};
  std::vector<VehicleState> last_states_;
  std::vector<VehicleInput> last_inputs_;
};

}  // namespace tvapf::tracker

#endif  // TVAPF__TRACKER_HPP_
