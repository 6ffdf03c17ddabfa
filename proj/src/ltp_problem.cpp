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

#include "tvapf/ltp_problem.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tvapf::planner
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_interval(const Interval & i, const char * name)
{
  if (!(i.min < i.max)) {
    throw std::invalid_argument(fmt::format("planner {} bounds [{}, {}] are empty", name, i.min, i.max));
  }
}
}  // namespace

void validate(const PlannerConfig & config)
{
  if (!(config.T_s > 0.0) || config.N < 2) {
    throw std::invalid_argument("planner needs T_s > 0 and N >= 2");
  }
  const double ratio = config.instance_period / config.T_s;
  if (!(config.instance_period > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw std::invalid_argument("planner instance_period must be a positive multiple of T_s");
  }
  require_interval(config.d_bounds, "d");
  require_interval(config.psi_bounds, "psi");
  require_interval(config.nu_bounds, "nu");
  require_interval(config.alpha_bounds, "alpha");
  require_interval(config.omega_bounds, "omega");
  require_interval(config.d_alpha_bounds, "d_alpha");
  require_interval(config.d_omega_bounds, "d_omega");
  const TerminalParams & t = config.terminal;
  if (!(t.alpha_min < 0.0) || !(t.j_max > 0.0) || t.tau < 0.0) {
    throw std::invalid_argument("terminal parameters need alpha_min < 0, j_max > 0, tau >= 0");
  }
  if (!(t.nu_ter > 0.0) || !(t.eps_d > 0.0) || !(t.eps_psi > 0.0)) {
    throw std::invalid_argument("terminal parameters need nu_ter, eps_d, eps_psi > 0");
  }
  if (config.K_o < 0.0) {
    throw std::invalid_argument("planner K_o must be >= 0");
  }
}

LtpProblem::LtpProblem(
  const geometry::ReferencePath & path, const FrenetState & xi0,
  std::vector<prediction::UncertainForecast> forecasts, const prediction::TvapfParams & tvapf,
  const potentials::PotentialConfig & potentials, const PlannerConfig & config,
  std::vector<double> v_bar, const TerminalBox & terminal)
: path_(path),
  xi0_(xi0),
  tvapf_(tvapf),
  potentials_(potentials),
  config_(config),
  v_bar_(std::move(v_bar)),
  terminal_(terminal)
{
  if (static_cast<int>(v_bar_.size()) != config_.N + 1) {
    throw std::invalid_argument("ltp: v_bar must have N + 1 entries");
  }
  lanes_.left_edge = path.left_edge();
  lanes_.right_edge = path.right_edge();
  lanes_.preferred_boundary = path.rightmost_lane_left_boundary();
  lanes_.target = path.lane_center(0);

  obstacle_steps_.resize(static_cast<std::size_t>(config_.N) + 1);
  for (const auto & f : forecasts) {
    if (static_cast<int>(f.steps.size()) < config_.N + 1) {
      throw std::invalid_argument(fmt::format("ltp: forecast {} does not span the horizon", f.id));
    }
    for (int j = 0; j <= config_.N; ++j) {
      const auto & st = f.steps[static_cast<std::size_t>(j)];
      obstacle_steps_[static_cast<std::size_t>(j)].push_back(
        {st.s_center, f.d_o, prediction::calibrated_scales(st, tvapf_)});
    }
  }
  n_obstacle_rows_ = forecasts.empty() ? 0 : config_.N;
  build_nlp();
}

void LtpProblem::build_nlp()
{
  const int N = config_.N;
  nlp_.n_vars = 6 * N + 4;
  nlp_.n_eq = 4 * (N + 1);
  nlp_.n_ineq = n_obstacle_rows_ + 4 * (N - 1);
  nlp_.lower = Eigen::VectorXd::Constant(nlp_.n_vars, -kInf);
  nlp_.upper = Eigen::VectorXd::Constant(nlp_.n_vars, kInf);
  for (int j = 0; j < N; ++j) {
    const int u = input_offset(j);
    nlp_.lower(u) = config_.alpha_bounds.min;
    nlp_.upper(u) = config_.alpha_bounds.max;
    nlp_.lower(u + 1) = config_.omega_bounds.min;
    nlp_.upper(u + 1) = config_.omega_bounds.max;
  }
  for (int j = 1; j <= N; ++j) {
    const int x = state_offset(j);
    nlp_.lower(x) = 0.0;
    nlp_.upper(x) = path_.length();
    nlp_.lower(x + 1) = config_.d_bounds.min;
    nlp_.upper(x + 1) = config_.d_bounds.max;
    nlp_.lower(x + 2) = config_.psi_bounds.min;
    nlp_.upper(x + 2) = config_.psi_bounds.max;
    nlp_.lower(x + 3) = config_.nu_bounds.min;
    nlp_.upper(x + 3) = config_.nu_bounds.max;
  }
  const int xn = state_offset(N);
  nlp_.upper(xn) = std::min(path_.length(), terminal_.s_max);
  nlp_.lower(xn + 1) = std::max(config_.d_bounds.min, terminal_.d_center - terminal_.eps_d);
  nlp_.upper(xn + 1) = std::min(config_.d_bounds.max, terminal_.d_center + terminal_.eps_d);
  nlp_.lower(xn + 2) = std::max(config_.psi_bounds.min, -terminal_.eps_psi);
  nlp_.upper(xn + 2) = std::min(config_.psi_bounds.max, terminal_.eps_psi);
  nlp_.upper(xn + 3) = std::min(config_.nu_bounds.max, terminal_.nu_max);
  nlp_.z0 = Eigen::VectorXd::Zero(nlp_.n_vars);

  nlp_.hessian_blocks.assign(static_cast<std::size_t>(N), 6);
  nlp_.hessian_blocks.push_back(4);

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

Eigen::VectorXd LtpProblem::pack(
  const std::vector<FrenetState> & states, const std::vector<ControlInput> & inputs) const
{
  const int N = config_.N;
  if (static_cast<int>(states.size()) != N + 1 || static_cast<int>(inputs.size()) != N) {
    throw std::invalid_argument("ltp: pack needs N + 1 states and N inputs");
  }
  Eigen::VectorXd z(nlp_.n_vars);
  for (int j = 0; j <= N; ++j) {
    z.segment<4>(state_offset(j)) = states[static_cast<std::size_t>(j)];
    if (j < N) {
      z.segment<2>(input_offset(j)) = inputs[static_cast<std::size_t>(j)];
    }
  }
  return z;
}

void LtpProblem::unpack(
  const Eigen::VectorXd & z, std::vector<FrenetState> & states, std::vector<ControlInput> & inputs) const
{
  const int N = config_.N;
  states.resize(static_cast<std::size_t>(N) + 1);
  inputs.resize(static_cast<std::size_t>(N));
  for (int j = 0; j <= N; ++j) {
    states[static_cast<std::size_t>(j)] = z.segment<4>(state_offset(j));
    if (j < N) {
      inputs[static_cast<std::size_t>(j)] = z.segment<2>(input_offset(j));
    }
  }
}

prediction::FieldTaylor LtpProblem::obstacle_field(int j, double s, double d) const
{
  prediction::FieldTaylor total;
  for (const auto & o : obstacle_steps_[static_cast<std::size_t>(j)]) {
    const auto t = prediction::tvapf_taylor(s, d, o.s_o, o.d_o, o.scales, tvapf_.c);
    total.value += t.value;
    total.gradient += t.gradient;
    total.hessian += t.hessian;
  }
  return total;
}

double LtpProblem::stage_cost(
  int j, const Eigen::VectorXd & z, Eigen::Matrix<double, 6, 1> * grad, StageMatrix * hess) const
{
  const int x = state_offset(j);
  const double s = z(x);
  const double d = z(x + 1);
  const double nu = z(x + 3);
  double value = 0.0;
  if (grad != nullptr) grad->setZero();
  if (hess != nullptr) hess->setZero();

  const auto & pc = potentials_;
  const auto speed = potentials::speed_cost_taylor(nu, v_bar_[static_cast<std::size_t>(j)]);
  value += pc.K_v * speed.value;
  const auto lateral = potentials::lateral_cost(d, lanes_, pc.eta, pc.K_b, pc.K_l);
  value += lateral.value;
  if (grad != nullptr) {
    (*grad)(3) += pc.K_v * speed.first;
    (*grad)(1) += lateral.first;
  }
  if (hess != nullptr) {
    (*hess)(3, 3) += pc.K_v * speed.second;
    (*hess)(1, 1) += lateral.second;
  }
  if (!obstacle_steps_[static_cast<std::size_t>(j)].empty() && config_.K_o > 0.0) {
    const auto field = obstacle_field(j, s, d);
    value += config_.K_o * field.value;
    if (grad != nullptr) grad->head<2>() += config_.K_o * field.gradient;
    if (hess != nullptr) hess->topLeftCorner<2, 2>() += config_.K_o * field.hessian;
  }
  if (j < config_.N) {
    const double omega = z(input_offset(j) + 1);
    const auto comfort = potentials::comfort_cost_taylor(nu, omega);
    value += pc.K_c * comfort.value;
    if (grad != nullptr) {
      (*grad)(3) += pc.K_c * comfort.gradient(0);
      (*grad)(5) += pc.K_c * comfort.gradient(1);
    }
    if (hess != nullptr) {
      (*hess)(3, 3) += pc.K_c * comfort.hessian(0, 0);
      (*hess)(3, 5) += pc.K_c * comfort.hessian(0, 1);
      (*hess)(5, 3) += pc.K_c * comfort.hessian(1, 0);
      (*hess)(5, 5) += pc.K_c * comfort.hessian(1, 1);
    }
  }
  return value;
}

double LtpProblem::objective(const Eigen::VectorXd & z) const
{
  double total = 0.0;
  for (int j = 0; j <= config_.N; ++j) {
    total += stage_cost(j, z, nullptr, nullptr);
  }
  return total;
}

void LtpProblem::gradient(const Eigen::VectorXd & z, Eigen::VectorXd & g) const
{
  g = Eigen::VectorXd::Zero(nlp_.n_vars);
  Eigen::Matrix<double, 6, 1> stage;
  for (int j = 0; j <= config_.N; ++j) {
    stage_cost(j, z, &stage, nullptr);
    const int width = j < config_.N ? 6 : 4;
    g.segment(state_offset(j), width) += stage.head(width);
  }
}

void LtpProblem::equalities(const Eigen::VectorXd & z, Eigen::VectorXd & c) const
{
  const int N = config_.N;
  c.resize(nlp_.n_eq);
  c.head<4>() = z.segment<4>(0) - xi0_;
  for (int j = 0; j < N; ++j) {
    const FrenetState next = discretize_dynamics(
      z.segment<4>(state_offset(j)), z.segment<2>(input_offset(j)), config_.T_s);
    c.segment<4>(4 + 4 * j) = z.segment<4>(state_offset(j + 1)) - next;
  }
}

void LtpProblem::equality_jacobian(const Eigen::VectorXd & z, solver::SparseMatrix & J) const
{
  const int N = config_.N;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(4 + 28 * N));
  for (int i = 0; i < 4; ++i) {
    entries.emplace_back(i, i, 1.0);
  }
  StepJacobian jac;
  for (int j = 0; j < N; ++j) {
    discretize_dynamics(z.segment<4>(state_offset(j)), z.segment<2>(input_offset(j)), config_.T_s, jac);
    const int row = 4 + 4 * j;
    for (int r = 0; r < 4; ++r) {
      for (int col = 0; col < 6; ++col) {
        if (jac(r, col) != 0.0) {
          entries.emplace_back(row + r, state_offset(j) + col, -jac(r, col));
        }
      }
      entries.emplace_back(row + r, state_offset(j + 1) + r, 1.0);
    }
  }
  J.resize(nlp_.n_eq, nlp_.n_vars);
  J.setFromTriplets(entries.begin(), entries.end());
}

void LtpProblem::inequalities(const Eigen::VectorXd & z, Eigen::VectorXd & c) const
{
  const int N = config_.N;
  c.resize(nlp_.n_ineq);
  int row = 0;
  if (n_obstacle_rows_ > 0) {
    for (int j = 1; j <= N; ++j) {
      const int x = state_offset(j);
      c(row++) = obstacle_field(j, z(x), z(x + 1)).value - tvapf_.epsilon_o;
    }
  }
  const Interval * rate[2] = {&config_.d_alpha_bounds, &config_.d_omega_bounds};
  for (int j = 0; j + 1 < N; ++j) {
    for (int k = 0; k < 2; ++k) {
      const double delta = z(input_offset(j + 1) + k) - z(input_offset(j) + k);
      c(row++) = delta - rate[k]->max;
      c(row++) = rate[k]->min - delta;
    }
  }
}

void LtpProblem::inequality_jacobian(const Eigen::VectorXd & z, solver::SparseMatrix & J) const
{
  const int N = config_.N;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(2 * n_obstacle_rows_ + 8 * N));
  int row = 0;
  if (n_obstacle_rows_ > 0) {
    for (int j = 1; j <= N; ++j) {
      const int x = state_offset(j);
      const auto field = obstacle_field(j, z(x), z(x + 1));
      entries.emplace_back(row, x, field.gradient(0));
      entries.emplace_back(row, x + 1, field.gradient(1));
      ++row;
    }
  }
  for (int j = 0; j + 1 < N; ++j) {
    for (int k = 0; k < 2; ++k) {
      entries.emplace_back(row, input_offset(j + 1) + k, 1.0);
      entries.emplace_back(row, input_offset(j) + k, -1.0);
      ++row;
      entries.emplace_back(row, input_offset(j + 1) + k, -1.0);
      entries.emplace_back(row, input_offset(j) + k, 1.0);
      ++row;
    }
  }
  J.resize(nlp_.n_ineq, nlp_.n_vars);
  J.setFromTriplets(entries.begin(), entries.end());
}

void LtpProblem::lagrangian_hessian(
  const Eigen::VectorXd & z, const Eigen::VectorXd & y_eq, const Eigen::VectorXd & y_in,
  std::vector<Eigen::MatrixXd> & blocks) const
{
  const int N = config_.N;
  StageMatrix stage;
  for (int j = 0; j <= N; ++j) {
    stage_cost(j, z, nullptr, &stage);
    if (j < N) {
      const Eigen::Vector4d w = -y_eq.segment<4>(4 + 4 * j);
      stage += dynamics_weighted_hessian(
        z.segment<4>(state_offset(j)), z.segment<2>(input_offset(j)), config_.T_s, w);
    }
    if (n_obstacle_rows_ > 0 && j >= 1) {
      const int x = state_offset(j);
      stage.topLeftCorner<2, 2>() += y_in(j - 1) * obstacle_field(j, z(x), z(x + 1)).hessian;
    }
    const int width = j < N ? 6 : 4;
    blocks[static_cast<std::size_t>(j)] = stage.topLeftCorner(width, width);
  }
}

}  // namespace tvapf::planner
