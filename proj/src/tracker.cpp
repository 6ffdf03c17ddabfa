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

#include "tvapf/tracker.hpp"

#include "tvapf/geometry.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tvapf::tracker
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp(double v, const Interval & i) { return std::min(std::max(v, i.min), i.max); }

void require_interval(const Interval & i, const char * name, bool contains_zero)
{
  if (!(i.min < i.max) || (contains_zero && !(i.min <= 0.0 && 0.0 <= i.max))) {
    throw std::invalid_argument(fmt::format("tracker {} bounds [{}, {}] are invalid", name, i.min, i.max));
  }
}

double yaw_rate(double v, double delta, double L) { return v * std::tan(delta) / L; }
}  // namespace

void validate(const TrackerConfig & config)
{
  if (!(config.T_s > 0.0) || config.N < 1) {
    throw std::invalid_argument("tracker needs T_s > 0 and N >= 1");
  }
  if ((config.Q.array() < 0.0).any() || (config.R.array() < 0.0).any()) {
    throw std::invalid_argument("tracker Q and R entries must be >= 0");
  }
  if (!(config.rho > 0.0) || !(config.wheelbase > 0.0)) {
    throw std::invalid_argument("tracker needs rho > 0 and a positive wheelbase");
  }
  if (!(config.e_bounds.array() > 0.0).all()) {
    throw std::invalid_argument("tracker error bounds must be positive");
  }
  require_interval(config.a_bounds, "a", true);
  require_interval(config.w_bounds, "w_delta", true);
  require_interval(config.da_bounds, "delta a", true);
  require_interval(config.dw_bounds, "delta w_delta", true);
  if (!(config.delta_max > 0.0) || !(config.yaw_rate_max > 0.0)) {
    throw std::invalid_argument("tracker steering and yaw rate limits must be positive");
  }
}

void check_input_consistency(const TrackerConfig & tracker, const planner::PlannerConfig & planner)
{
  if (!(tracker.a_bounds.min > planner.alpha_bounds.min && tracker.a_bounds.max < planner.alpha_bounds.max)) {
    throw std::invalid_argument(fmt::format(
      "tracker acceleration limits [{}, {}] must lie strictly inside the planner limits [{}, {}]",
      tracker.a_bounds.min, tracker.a_bounds.max, planner.alpha_bounds.min, planner.alpha_bounds.max));
  }
}

std::vector<VehicleInput> reference_inputs(const std::vector<VehicleState> & ref, double T_s)
{
  std::vector<VehicleInput> u;
  for (std::size_t k = 0; k + 1 < ref.size(); ++k) {
    u.emplace_back((ref[k + 1](3) - ref[k](3)) / T_s, (ref[k + 1](4) - ref[k](4)) / T_s);
  }
  return u;
}

NmpcProblem::NmpcProblem(
  const TrackerConfig & config, const VehicleState & chi0, std::vector<VehicleState> ref,
  const VehicleInput & u_prev)
: config_(config), chi0_(chi0), ref_(std::move(ref)), u_prev_(u_prev)
{
  if (static_cast<int>(ref_.size()) != config_.N + 1) {
    throw std::invalid_argument("nmpc: reference must have N + 1 states");
  }
  ref_[0](2) = chi0(2) + geometry::wrap_angle(ref_[0](2) - chi0(2));
  for (std::size_t k = 1; k < ref_.size(); ++k) {
    ref_[k](2) = ref_[k - 1](2) + geometry::wrap_angle(ref_[k](2) - ref_[k - 1](2));
  }
  u_ref_ = reference_inputs(ref_, config_.T_s);
  build_nlp();
}

void NmpcProblem::build_nlp()
{
  const int N = config_.N;
  nlp_.n_vars = 7 * N + 6;
  nlp_.n_eq = 5 * (N + 1);
  nlp_.n_ineq = 6 * N + 1;
  nlp_.lower = Eigen::VectorXd::Constant(nlp_.n_vars, -kInf);
  nlp_.upper = Eigen::VectorXd::Constant(nlp_.n_vars, kInf);
  for (int k = 0; k < N; ++k) {
    const int u = input_offset(k);
    nlp_.lower(u) = config_.a_bounds.min;
    nlp_.upper(u) = config_.a_bounds.max;
    nlp_.lower(u + 1) = config_.w_bounds.min;
    nlp_.upper(u + 1) = config_.w_bounds.max;
  }
  for (int k = 1; k <= N; ++k) {
    const int x = state_offset(k);
    const VehicleState & r = ref_[static_cast<std::size_t>(k)];
    for (int i = 0; i < 4; ++i) {
      nlp_.lower(x + i) = r(i) - config_.e_bounds(i);
      nlp_.upper(x + i) = r(i) + config_.e_bounds(i);
    }
    nlp_.lower(x + 3) = std::max(nlp_.lower(x + 3), 0.0);
    nlp_.upper(x + 3) = std::max(nlp_.upper(x + 3), nlp_.lower(x + 3) + config_.e_bounds(3));
    nlp_.lower(x + 4) = -config_.delta_max;
    nlp_.upper(x + 4) = config_.delta_max;
  }
  nlp_.lower(sigma_offset()) = 0.0;
  nlp_.z0 = Eigen::VectorXd::Zero(nlp_.n_vars);
  nlp_.hessian_blocks.assign(static_cast<std::size_t>(N), 7);
  nlp_.hessian_blocks.push_back(6);

  nlp_.objective = [this](const Eigen::VectorXd & z) { return objective(z); };
  nlp_.gradient = [this](const Eigen::VectorXd & z, Eigen::VectorXd & g) { gradient(z, g); };
  nlp_.equalities = [this](const Eigen::VectorXd & z, Eigen::VectorXd & c) { equalities(z, c); };
  nlp_.equality_jacobian = [this](const Eigen::VectorXd & z, solver::SparseMatrix & J) {
    equality_jacobian(z, J);
  };
  nlp_.inequalities = [this](const Eigen::VectorXd & z, Eigen::VectorXd & c) { inequalities(z, c); };
  nlp_.inequality_jacobian = [this](const Eigen::VectorXd & z, solver::SparseMatrix & J) {
    inequality_jacobian(z, J);
  };
  nlp_.lagrangian_hessian = [this](const Eigen::VectorXd & z, const Eigen::VectorXd & ye,
                                   const Eigen::VectorXd & yi, std::vector<Eigen::MatrixXd> & b) {
    lagrangian_hessian(z, ye, yi, b);
  };
}

VehicleState NmpcProblem::error(const Eigen::VectorXd & z, int k) const
{
  return z.segment<5>(state_offset(k)) - ref_[static_cast<std::size_t>(k)];
}

double NmpcProblem::objective(const Eigen::VectorXd & z) const
{
  const int N = config_.N;
  double total = 0.0;
  for (int k = 0; k <= N; ++k) {
    const VehicleState e = error(z, k);
    total += e.dot(config_.Q.cwiseProduct(e));
    if (k < N) {
      const VehicleInput du = z.segment<2>(input_offset(k)) - u_ref_[static_cast<std::size_t>(k)];
      total += du.dot(config_.R.cwiseProduct(du));
    }
  }
  const double sigma = z(sigma_offset());
  return total + config_.rho * sigma * sigma;
}

void NmpcProblem::gradient(const Eigen::VectorXd & z, Eigen::VectorXd & g) const
{
  const int N = config_.N;
  g = Eigen::VectorXd::Zero(nlp_.n_vars);
  for (int k = 0; k <= N; ++k) {
    g.segment<5>(state_offset(k)) = 2.0 * config_.Q.cwiseProduct(error(z, k));
    if (k < N) {
      const VehicleInput du = z.segment<2>(input_offset(k)) - u_ref_[static_cast<std::size_t>(k)];
      g.segment<2>(input_offset(k)) = 2.0 * config_.R.cwiseProduct(du);
    }
  }
  g(sigma_offset()) = 2.0 * config_.rho * z(sigma_offset());
}

void NmpcProblem::equalities(const Eigen::VectorXd & z, Eigen::VectorXd & c) const
{
  c.resize(nlp_.n_eq);
  c.head<5>() = z.segment<5>(0) - chi0_;
  for (int k = 0; k < config_.N; ++k) {
    c.segment<5>(5 + 5 * k) =
      z.segment<5>(state_offset(k + 1)) -
      bicycle_step(z.segment<5>(state_offset(k)), z.segment<2>(input_offset(k)), config_.T_s, config_.wheelbase);
  }
}

void NmpcProblem::equality_jacobian(const Eigen::VectorXd & z, solver::SparseMatrix & J) const
{
  std::vector<Eigen::Triplet<double>> entries;
  for (int i = 0; i < 5; ++i) {
    entries.emplace_back(i, i, 1.0);
  }
  BicycleJacobian jac;
  for (int k = 0; k < config_.N; ++k) {
    bicycle_step(
      z.segment<5>(state_offset(k)), z.segment<2>(input_offset(k)), config_.T_s, config_.wheelbase, jac);
    const int row = 5 + 5 * k;
    for (int r = 0; r < 5; ++r) {
      for (int col = 0; col < 7; ++col) {
        if (jac(r, col) != 0.0) {
          entries.emplace_back(row + r, state_offset(k) + col, -jac(r, col));
        }
      }
      entries.emplace_back(row + r, state_offset(k + 1) + r, 1.0);
    }
  }
  J.resize(nlp_.n_eq, nlp_.n_vars);
  J.setFromTriplets(entries.begin(), entries.end());
}

void NmpcProblem::inequalities(const Eigen::VectorXd & z, Eigen::VectorXd & c) const
{
  const int N = config_.N;
  c.resize(nlp_.n_ineq);
  int row = 0;
  const Interval * rate[2] = {&config_.da_bounds, &config_.dw_bounds};
  for (int k = 0; k < N; ++k) {
    const VehicleInput prev = k == 0 ? u_prev_ : VehicleInput(z.segment<2>(input_offset(k - 1)));
    const VehicleInput du = z.segment<2>(input_offset(k)) - prev;
    for (int i = 0; i < 2; ++i) {
      c(row++) = du(i) - rate[i]->max;
      c(row++) = rate[i]->min - du(i);
    }
  }
  for (int k = 1; k <= N; ++k) {
    const int x = state_offset(k);
    const double r = yaw_rate(z(x + 3), z(x + 4), config_.wheelbase);
    c(row++) = r - config_.yaw_rate_max;
    c(row++) = -r - config_.yaw_rate_max;
  }
  c(row) = error(z, N).squaredNorm() - z(sigma_offset());
}

void NmpcProblem::inequality_jacobian(const Eigen::VectorXd & z, solver::SparseMatrix & J) const
{
  const int N = config_.N;
  const double L = config_.wheelbase;
  std::vector<Eigen::Triplet<double>> entries;
  int row = 0;
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < 2; ++i) {
      entries.emplace_back(row, input_offset(k) + i, 1.0);
      if (k > 0) entries.emplace_back(row, input_offset(k - 1) + i, -1.0);
      ++row;
      entries.emplace_back(row, input_offset(k) + i, -1.0);
      if (k > 0) entries.emplace_back(row, input_offset(k - 1) + i, 1.0);
      ++row;
    }
  }
  for (int k = 1; k <= N; ++k) {
    const int x = state_offset(k);
    const double v = z(x + 3);
    const double cd = std::cos(z(x + 4));
    const double dr_dv = std::tan(z(x + 4)) / L;
    const double dr_dd = v / (L * cd * cd);
    entries.emplace_back(row, x + 3, dr_dv);
    entries.emplace_back(row, x + 4, dr_dd);
    ++row;
    entries.emplace_back(row, x + 3, -dr_dv);
    entries.emplace_back(row, x + 4, -dr_dd);
    ++row;
  }
  const VehicleState e = error(z, N);
  for (int i = 0; i < 5; ++i) {
    entries.emplace_back(row, state_offset(N) + i, 2.0 * e(i));
  }
  entries.emplace_back(row, sigma_offset(), -1.0);
  J.resize(nlp_.n_ineq, nlp_.n_vars);
  J.setFromTriplets(entries.begin(), entries.end());
}

void NmpcProblem::lagrangian_hessian(
  const Eigen::VectorXd & z, const Eigen::VectorXd & y_eq, const Eigen::VectorXd & y_in,
  std::vector<Eigen::MatrixXd> & blocks) const
{
  const int N = config_.N;
  const double L = config_.wheelbase;
  auto yaw_hessian = [&](int k, Eigen::MatrixXd & block) {
    const int x = state_offset(k);
    const double v = z(x + 3);
    const double d = z(x + 4);
    const double sec2 = 1.0 / (std::cos(d) * std::cos(d));
    const double weight = y_in(4 * N + 2 * (k - 1)) - y_in(4 * N + 2 * (k - 1) + 1);
    block(3, 4) += weight * sec2 / L;
    block(4, 3) += weight * sec2 / L;
    block(4, 4) += weight * 2.0 * v * sec2 * std::tan(d) / L;
  };
  for (int k = 0; k < N; ++k) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(7, 7);
    block.topLeftCorner<5, 5>().diagonal() = 2.0 * config_.Q;
    block.bottomRightCorner<2, 2>().diagonal() = 2.0 * config_.R;
    const Eigen::Matrix<double, 5, 1> w = -y_eq.segment<5>(5 + 5 * k);
    block += bicycle_weighted_hessian(
      z.segment<5>(state_offset(k)), z.segment<2>(input_offset(k)), config_.T_s, L, w);
    if (k >= 1) yaw_hessian(k, block);
    blocks[static_cast<std::size_t>(k)] = block;
  }
  Eigen::MatrixXd last = Eigen::MatrixXd::Zero(6, 6);
  last.topLeftCorner<5, 5>().diagonal() =
    2.0 * config_.Q + Eigen::Matrix<double, 5, 1>::Constant(2.0 * y_in(6 * N));
  last(5, 5) = 2.0 * config_.rho;
  yaw_hessian(N, last);
  blocks[static_cast<std::size_t>(N)] = last;
}

Tracker::Tracker(const TrackerConfig & config, const planner::PlannerConfig & planner) : config_(config)
{
  validate(config_);
  check_input_consistency(config_, planner);
}

void Tracker::reset(const VehicleInput & u_prev)
{
  u_prev_ = u_prev;
  last_states_.clear();
  last_inputs_.clear();
}

TrackerResult Tracker::step(const VehicleState & chi0, const std::vector<VehicleState> & ref)
{
  const auto start = std::chrono::steady_clock::now();
  const int N = config_.N;
  NmpcProblem problem(config_, chi0, ref, u_prev_);

  std::vector<VehicleState> xs{chi0};
  std::vector<VehicleInput> us;
  if (static_cast<int>(last_inputs_.size()) == N) {
    for (int k = 0; k < N; ++k) {
      us.push_back(last_inputs_[static_cast<std::size_t>(std::min(k + 1, N - 1))]);
    }
  } else {
    us = reference_inputs(problem.reference(), config_.T_s);
  }
  for (int k = 0; k < N; ++k) {
    us[static_cast<std::size_t>(k)](0) = clamp(us[static_cast<std::size_t>(k)](0), config_.a_bounds);
    us[static_cast<std::size_t>(k)](1) = clamp(us[static_cast<std::size_t>(k)](1), config_.w_bounds);
    if (static_cast<int>(last_states_.size()) == N + 1) {
      xs.push_back(last_states_[static_cast<std::size_t>(std::min(k + 2, N))]);
    } else {
      xs.push_back(bicycle_step(xs.back(), us[static_cast<std::size_t>(k)], config_.T_s, config_.wheelbase));
    }
  }

  solver::NlpProblem nlp = problem.nlp();
  nlp.z0.resize(nlp.n_vars);
  for (int k = 0; k <= N; ++k) {
    nlp.z0.segment<5>(NmpcProblem::state_offset(k)) = xs[static_cast<std::size_t>(k)];
    if (k < N) nlp.z0.segment<2>(NmpcProblem::input_offset(k)) = us[static_cast<std::size_t>(k)];
  }
  nlp.z0(problem.sigma_offset()) = (xs.back() - problem.reference().back()).squaredNorm();

  solver::SolveOptions options;
  options.max_iter = config_.max_iterations;
  options.tol = 1e-8;
  TrackerResult out;
  solver::SolveResult result;
  bool ok = false;
  try {
    result = solver::solve(nlp, options);
    ok = result.status == solver::SolveStatus::Optimal || result.status == solver::SolveStatus::FeasiblePoint;
    out.status = solver::to_string(result.status);
    out.iterations = result.iterations;
  } catch (const solver::CallbackFailure & e) {
    out.status = e.what();
  }

  if (ok) {
    out.predicted.clear();
    for (int k = 0; k <= N; ++k) {
      out.predicted.push_back(result.z.segment<5>(NmpcProblem::state_offset(k)));
      if (k < N) out.inputs.push_back(result.z.segment<2>(NmpcProblem::input_offset(k)));
    }
    out.sigma = result.z(problem.sigma_offset());
    out.u0 = out.inputs.front();
    last_states_ = out.predicted;
    last_inputs_ = out.inputs;
  } else {
    out.infeasible = true;
    out.u0 << config_.a_bounds.min, 0.0;
    last_states_.clear();
    last_inputs_.clear();
  }
  out.u0(0) = std::clamp(
    clamp(out.u0(0), config_.a_bounds), u_prev_(0) + config_.da_bounds.min, u_prev_(0) + config_.da_bounds.max);
  out.u0(1) = std::clamp(
    clamp(out.u0(1), config_.w_bounds), u_prev_(1) + config_.dw_bounds.min, u_prev_(1) + config_.dw_bounds.max);
  u_prev_ = out.u0;
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace tvapf::tracker
