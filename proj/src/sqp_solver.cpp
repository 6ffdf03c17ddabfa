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

#include "tvapf/sqp_solver.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace tvapf::solver
{
namespace
{
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-10;
constexpr double kCurvatureFloor = 1e-6;
constexpr int kMaxPenaltyRaises = 4;

struct Point
{
  VectorXd z;
  double f{0.0};
  VectorXd g;
  VectorXd ce;
  VectorXd ci;
  SparseMatrix Je;
  SparseMatrix Ji;
};

void require_finite(const VectorXd & v, const char * what)
{
  if (!v.allFinite()) {
    throw CallbackFailure(fmt::format("non-finite value returned by {}", what));
  }
}

void require_finite(const SparseMatrix & m, const char * what)
{
  for (Eigen::Index k = 0; k < m.nonZeros(); ++k) {
    if (!std::isfinite(m.valuePtr()[k])) {
      throw CallbackFailure(fmt::format("non-finite value returned by {}", what));
    }
  }
}

class Sqp
{
public:
  Sqp(const NlpProblem & p, const SolveOptions & o) : p_(p), o_(o)
  {
    const Eigen::Index n = p.n_vars;
    if (p.lower.size() != n || p.upper.size() != n || p.z0.size() != n) {
      throw std::invalid_argument("nlp: bounds or initial guess have the wrong size");
    }
    if (!p.objective || !p.gradient) {
      throw std::invalid_argument("nlp: objective and gradient callbacks are required");
    }
    if ((p.n_eq > 0 && (!p.equalities || !p.equality_jacobian)) ||
        (p.n_ineq > 0 && (!p.inequalities || !p.inequality_jacobian))) {
      throw std::invalid_argument("nlp: constraint callbacks missing");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(p.lower(i) < p.upper(i))) {
        throw std::invalid_argument(fmt::format("nlp: bound {} is empty", i));
      }
    }
    blocks_ = p.hessian_blocks.empty() ? std::vector<int>{p.n_vars} : p.hessian_blocks;
    if (std::accumulate(blocks_.begin(), blocks_.end(), 0) != p.n_vars) {
      throw std::invalid_argument("nlp: hessian blocks do not cover the variables");
    }
    offsets_.resize(blocks_.size());
    int off = 0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      offsets_[b] = off;
      off += blocks_[b];
    }
  }

  SolveResult run()
  {
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&]() {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    SolveResult result;
    Point x;
    x.z = p_.z0.cwiseMax(p_.lower).cwiseMin(p_.upper);
    evaluate_values(x);
    evaluate_derivatives(x);
    VectorXd y_eq = VectorXd::Zero(p_.n_eq);
    VectorXd y_in = VectorXd::Zero(p_.n_ineq);
    init_hessian(x, y_eq, y_in);
    double mu = o_.initial_penalty;

    bool have_best = false;
    VectorXd best_z;
    double best_f = 0.0;
    const auto remember = [&](const Point & pt) {
      if (violation_inf(pt) <= o_.tol && (!have_best || pt.f < best_f)) {
        have_best = true;
        best_z = pt.z;
        best_f = pt.f;
      }
    };
    remember(x);

    result.status = SolveStatus::IterLimit;
    int iter = 0;
    for (; iter < o_.max_iter; ++iter) {
      if (elapsed() > o_.max_wall_time) {
        break;
      }
      QpProblem qp = build_qp(x);
      QpOptions qo;
      qo.tol = 1e-10;
      qo.elastic_penalty = mu;
      QpResult sub;
      const double viol1 = violation_l1(x);
      try {
        sub = solve_qp(qp, VectorXd::Zero(p_.n_vars), qo);
        for (int raise = 0; raise < kMaxPenaltyRaises && mu < o_.max_penalty; ++raise) {
          if (sub.elastic_violation <= 1e-9 * (1.0 + viol1)) {
            break;
          }
          const double previous = sub.elastic_violation;
          mu = std::min(mu * 10.0, o_.max_penalty);
          qo.elastic_penalty = mu;
          sub = solve_qp(qp, VectorXd::Zero(p_.n_vars), qo);
          if (sub.elastic_violation > 0.99 * previous) {
            break;
          }
        }
      } catch (const std::runtime_error &) {
        // numerically broken subproblem: keep the best point found so far
        break;
      }
      const VectorXd & step = sub.x;
      y_eq = sub.y_eq;
      y_in = sub.y_in;

      const double kkt = kkt_residual(x, sub);
      const double viol = violation_inf(x);
      result.kkt_residual = kkt;
      if (viol <= o_.tol && kkt <= o_.tol) {
        result.status = SolveStatus::Optimal;
        break;
      }
      const double step_norm = step.lpNorm<Eigen::Infinity>();
      if (step_norm <= 1e-12 * (1.0 + x.z.lpNorm<Eigen::Infinity>())) {
        if (viol > o_.tol && mu >= o_.max_penalty) {
          result.status = SolveStatus::Infeasible;
          break;
        }
        if (viol > o_.tol) {
          mu = std::min(mu * 10.0, o_.max_penalty);
          continue;
        }
      }

      const double merit0 = x.f + mu * viol1;
      const double model_obj = x.g.dot(step) + 0.5 * step.dot(hessian_product(step));
      const double pred = -model_obj + mu * (viol1 - sub.elastic_violation);
      if (!(pred > 1e-14 * (1.0 + std::abs(merit0)))) {
        if (viol <= o_.tol) {
          result.status = SolveStatus::Optimal;
        } else if (mu >= o_.max_penalty) {
          result.status = SolveStatus::Infeasible;
        } else {
          mu = std::min(mu * 10.0, o_.max_penalty);
          continue;
        }
        break;
      }

      Point trial;
      double alpha = 1.0;
      bool accepted = false;
      while (alpha >= kMinStep) {
        trial.z = (x.z + alpha * step).cwiseMax(p_.lower).cwiseMin(p_.upper);
        evaluate_values(trial);
        const double merit = trial.f + mu * violation_l1(trial);
        if (merit <= merit0 - kArmijo * alpha * pred) {
          accepted = true;
          break;
        }
        if (alpha == 1.0) {
          // second-order correction: re-linearize the constraints at the trial point
          Point corrected;
          if (second_order_correction(x, step, trial, qp, qo, corrected)) {
            const double merit_c = corrected.f + mu * violation_l1(corrected);
            if (merit_c <= merit0 - kArmijo * pred) {
              trial = std::move(corrected);
              accepted = true;
              break;
            }
          }
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        break;
      }

      const Point previous = x;
      x = std::move(trial);
      evaluate_derivatives(x);
      update_hessian(previous, x, y_eq, y_in);
      remember(x);

      IterationRecord rec{iter + 1, x.f, violation_inf(x), x.f + mu * violation_l1(x), alpha, mu};
      result.history.push_back(rec);
      if (o_.log != nullptr) {
        fmt::print(*o_.log, "{:4d} f={:.10e} viol={:.3e} merit={:.10e} alpha={:.3e} mu={:.1e}\n",
          rec.iteration, rec.objective, rec.violation, rec.merit, rec.step_size, rec.penalty);
      }
    }
    result.iterations = iter;

    if (result.status == SolveStatus::IterLimit || (result.status == SolveStatus::Infeasible && have_best)) {
      if (have_best) {
        result.status = SolveStatus::FeasiblePoint;
        if (best_f < x.f || violation_inf(x) > o_.tol) {
          x.z = best_z;
          evaluate_values(x);
        }
      }
    }
    result.z = x.z;
    result.objective = x.f;
    result.constraint_violation = violation_inf(x);
    result.y_eq = y_eq;
    result.y_in = y_in;
    result.wall_time = elapsed();
    return result;
  }

private:
  void evaluate_values(Point & pt) const
  {
    pt.f = p_.objective(pt.z);
    if (!std::isfinite(pt.f)) {
      throw CallbackFailure("non-finite value returned by objective");
    }
    pt.ce.resize(p_.n_eq);
    pt.ci.resize(p_.n_ineq);
    if (p_.n_eq > 0) {
      p_.equalities(pt.z, pt.ce);
      require_finite(pt.ce, "equalities");
    }
    if (p_.n_ineq > 0) {
      p_.inequalities(pt.z, pt.ci);
      require_finite(pt.ci, "inequalities");
    }
  }

  void evaluate_derivatives(Point & pt) const
  {
    pt.g.resize(p_.n_vars);
    p_.gradient(pt.z, pt.g);
    require_finite(pt.g, "gradient");
    pt.Je.resize(p_.n_eq, p_.n_vars);
    pt.Ji.resize(p_.n_ineq, p_.n_vars);
    if (p_.n_eq > 0) {
      p_.equality_jacobian(pt.z, pt.Je);
      require_finite(pt.Je, "equality jacobian");
    }
    if (p_.n_ineq > 0) {
      p_.inequality_jacobian(pt.z, pt.Ji);
      require_finite(pt.Ji, "inequality jacobian");
    }
  }

  static double violation_inf(const Point & pt)
  {
    double v = 0.0;
    if (pt.ce.size() > 0) v = std::max(v, pt.ce.lpNorm<Eigen::Infinity>());
    if (pt.ci.size() > 0) v = std::max(v, pt.ci.maxCoeff());
    return v;
  }

  static double violation_l1(const Point & pt)
  {
    double v = 0.0;
    if (pt.ce.size() > 0) v += pt.ce.lpNorm<1>();
    if (pt.ci.size() > 0) v += pt.ci.cwiseMax(0.0).sum();
    return v;
  }

  double kkt_residual(const Point & pt, const QpResult & sub) const
  {
    VectorXd r = pt.g - sub.z_lower + sub.z_upper;
    if (p_.n_eq > 0) r += pt.Je.transpose() * sub.y_eq;
    if (p_.n_ineq > 0) r += pt.Ji.transpose() * sub.y_in;
    double res = r.lpNorm<Eigen::Infinity>() / std::max(1.0, pt.g.lpNorm<Eigen::Infinity>());
    for (Eigen::Index i = 0; i < p_.n_ineq; ++i) {
      res = std::max(res, std::abs(sub.y_in(i) * std::min(pt.ci(i), 0.0)));
    }
    for (Eigen::Index i = 0; i < p_.n_vars; ++i) {
      if (std::isfinite(p_.lower(i))) res = std::max(res, std::abs(sub.z_lower(i) * (pt.z(i) - p_.lower(i))));
      if (std::isfinite(p_.upper(i))) res = std::max(res, std::abs(sub.z_upper(i) * (p_.upper(i) - pt.z(i))));
    }
    return res;
  }

  QpProblem build_qp(const Point & pt) const
  {
    QpProblem qp;
    qp.H = assemble_hessian();
    qp.q = pt.g;
    qp.A = pt.Je;
    qp.b = -pt.ce;
    qp.C = pt.Ji;
    qp.d = -pt.ci;
    qp.lower = p_.lower - pt.z;
    qp.upper = p_.upper - pt.z;
    return qp;
  }

  bool second_order_correction(
    const Point & x, const VectorXd & step, const Point & trial, QpProblem & qp,
    const QpOptions & qo, Point & out) const
  {
    if (p_.n_eq + p_.n_ineq == 0) {
      return false;
    }
    if (p_.n_eq > 0) qp.b = -(trial.ce - x.Je * step);
    if (p_.n_ineq > 0) qp.d = -(trial.ci - x.Ji * step);
    QpResult sub;
    try {
      sub = solve_qp(qp, step, qo);
    } catch (const std::runtime_error &) {
      return false;
    }
    if (sub.status != QpStatus::Optimal) {
      return false;
    }
    out.z = (x.z + sub.x).cwiseMax(p_.lower).cwiseMin(p_.upper);
    evaluate_values(out);
    return true;
  }

  SparseMatrix assemble_hessian() const
  {
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const MatrixXd & B = hess_[b];
      for (int c = 0; c < blocks_[b]; ++c) {
        for (int r = c; r < blocks_[b]; ++r) {
          if (B(r, c) != 0.0 || r == c) {
            entries.emplace_back(offsets_[b] + r, offsets_[b] + c, B(r, c));
          }
        }
      }
    }
    SparseMatrix H(p_.n_vars, p_.n_vars);
    H.setFromTriplets(entries.begin(), entries.end());
    return H;
  }

  VectorXd hessian_product(const VectorXd & v) const
  {
    VectorXd out(v.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      out.segment(offsets_[b], blocks_[b]) = hess_[b] * v.segment(offsets_[b], blocks_[b]);
    }
    return out;
  }

  void init_hessian(const Point & x, const VectorXd & y_eq, const VectorXd & y_in)
  {
    hess_.resize(blocks_.size());
    if (p_.lagrangian_hessian) {
      exact_hessian(x, y_eq, y_in);
      return;
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      hess_[b] = MatrixXd::Identity(blocks_[b], blocks_[b]);
    }
  }

  void exact_hessian(const Point & x, const VectorXd & y_eq, const VectorXd & y_in)
  {
    std::vector<MatrixXd> raw(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      raw[b] = MatrixXd::Zero(blocks_[b], blocks_[b]);
    }
    p_.lagrangian_hessian(x.z, y_eq, y_in, raw);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const MatrixXd sym = 0.5 * (raw[b] + raw[b].transpose());
      if (!sym.allFinite()) {
        throw CallbackFailure("non-finite value returned by lagrangian hessian");
      }
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
      VectorXd values = eig.eigenvalues().cwiseAbs().cwiseMax(kCurvatureFloor);
      hess_[b] = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    }
  }

  void update_hessian(const Point & prev, const Point & next, const VectorXd & y_eq, const VectorXd & y_in)
  {
    if (p_.lagrangian_hessian) {
      exact_hessian(next, y_eq, y_in);
      return;
    }
    const VectorXd s = next.z - prev.z;
    VectorXd grad_next = next.g;
    VectorXd grad_prev = prev.g;
    if (p_.n_eq > 0) {
      grad_next += next.Je.transpose() * y_eq;
      grad_prev += prev.Je.transpose() * y_eq;
    }
    if (p_.n_ineq > 0) {
      grad_next += next.Ji.transpose() * y_in;
      grad_prev += prev.Ji.transpose() * y_in;
    }
    const VectorXd y = grad_next - grad_prev;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const VectorXd sb = s.segment(offsets_[b], blocks_[b]);
      const VectorXd yb = y.segment(offsets_[b], blocks_[b]);
      MatrixXd & B = hess_[b];
      const VectorXd bs = B * sb;
      const double sbs = sb.dot(bs);
      if (sbs <= 1e-16) {
        continue;
      }
      const double sy = sb.dot(yb);
      // Powell damping keeps the block positive definite
      const double theta = sy >= 0.2 * sbs ? 1.0 : 0.8 * sbs / (sbs - sy);
      const VectorXd r = theta * yb + (1.0 - theta) * bs;
      const double sr = sb.dot(r);
      if (sr <= 1e-16) {
        continue;
      }
      B += r * r.transpose() / sr - bs * bs.transpose() / sbs;
    }
  }

  const NlpProblem & p_;
  SolveOptions o_;
  std::vector<int> blocks_;
  std::vector<int> offsets_;
  std::vector<MatrixXd> hess_;
};
}  // namespace

std::string to_string(SolveStatus status)
{
  switch (status) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::FeasiblePoint:
      return "FeasiblePoint";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::IterLimit:
      return "IterLimit";
  }
  return "Unknown";
}

SolveResult solve(const NlpProblem & problem, const SolveOptions & options)
{
  Sqp sqp(problem, options);
  return sqp.run();
}

}  // namespace tvapf::solver
