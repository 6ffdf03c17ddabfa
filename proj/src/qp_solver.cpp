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

#include "tvapf/qp_solver.hpp"

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tvapf::solver
{
namespace
{
constexpr double kPrimalReg = 1e-9;
constexpr double kDualReg = 1e-10;
constexpr double kFractionToBoundary = 0.995;
constexpr int kRefinementSteps = 3;

using Eigen::VectorXd;

struct Iterate
{
  VectorXd x, lam, y, zl, zu, s, t, vp, vm;
};

struct ComplementarityRhs
{
  VectorXd l, u, r1, r2, r3, r4;
};

double inf_norm(const VectorXd & v)
{
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

class QpSolverImpl
{
public:
  QpSolverImpl(const QpProblem & qp, const QpOptions & options)
  : qp_(qp), options_(options)
  {
    n_ = qp.q.size();
    me_ = qp.A.rows();
    mi_ = qp.C.rows();
    check_dimensions();
    mu_ = options.elastic_penalty;
    elastic_ = mu_ > 0.0;
    has_l_.resize(static_cast<std::size_t>(n_));
    has_u_.resize(static_cast<std::size_t>(n_));
    for (Eigen::Index i = 0; i < n_; ++i) {
      has_l_[static_cast<std::size_t>(i)] = std::isfinite(qp.lower(i)) ? 1 : 0;
      has_u_[static_cast<std::size_t>(i)] = std::isfinite(qp.upper(i)) ? 1 : 0;
      if (!(qp.lower(i) < qp.upper(i))) {
        throw std::invalid_argument(
          fmt::format("qp bound {} is empty or degenerate: [{}, {}]", i, qp.lower(i), qp.upper(i)));
      }
    }
    build_pattern();
  }

  QpResult solve(const VectorXd & guess)
  {
    initialize(guess);
    QpResult result;
    const double scale_d = 1.0 + inf_norm(qp_.q);
    const double scale_e = 1.0 + inf_norm(qp_.b);
    const double scale_i = 1.0 + inf_norm(qp_.d);
    for (int iter = 0; iter < options_.max_iter; ++iter) {
      compute_residuals();
      const double tau = mean_complementarity();
      if (
        inf_norm(rd_) <= options_.tol * scale_d && inf_norm(re_) <= options_.tol * scale_e &&
        inf_norm(ri_) <= options_.tol * scale_i && tau <= options_.tol * scale_d) {
        result.status = QpStatus::Optimal;
        result.iterations = iter;
        break;
      }
      result.iterations = iter + 1;
      update_and_factorize();

      ComplementarityRhs rc = affine_rhs();
      Iterate aff = direction(rc);
      const double alpha_aff = step_to_boundary(aff, 1.0);
      const double tau_aff = mean_complementarity_after(aff, alpha_aff);
      const double sigma = tau > 0.0 ? std::pow(tau_aff / tau, 3) : 0.0;
      corrector_rhs(rc, aff, sigma * tau);
      const Iterate dir = direction(rc);
      const double alpha = step_to_boundary(dir, kFractionToBoundary);
      apply(dir, alpha);
    }
    result.x = it_.x;
    result.y_eq = it_.lam;
    result.y_in = it_.y;
    result.z_lower = it_.zl;
    result.z_upper = it_.zu;
    const VectorXd hx = qp_.H.selfadjointView<Eigen::Lower>() * it_.x;
    result.objective = 0.5 * it_.x.dot(hx) + qp_.q.dot(it_.x);
    double violation = 0.0;
    if (me_ > 0) {
      violation += (qp_.A * it_.x - qp_.b).lpNorm<1>();
    }
    if (mi_ > 0) {
      violation += (qp_.C * it_.x - qp_.d).cwiseMax(0.0).sum();
    }
    result.elastic_violation = violation;
    return result;
  }

private:
  void check_dimensions() const
  {
    const auto bad = [](const char * what) {
      throw std::invalid_argument(fmt::format("qp dimension mismatch in {}", what));
    };
    if (qp_.H.rows() != n_ || qp_.H.cols() != n_) bad("H");
    if (qp_.lower.size() != n_ || qp_.upper.size() != n_) bad("bounds");
    if (qp_.b.size() != me_ || (me_ > 0 && qp_.A.cols() != n_)) bad("A");
    if (qp_.d.size() != mi_ || (mi_ > 0 && qp_.C.cols() != n_)) bad("C");
  }

  void build_pattern()
  {
    const Eigen::Index dim = n_ + me_ + mi_;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(qp_.H.nonZeros() + qp_.A.nonZeros() + qp_.C.nonZeros() + dim));
    for (Eigen::Index k = 0; k < dim; ++k) {
      entries.emplace_back(k, k, 0.0);
    }
    for (int col = 0; col < qp_.H.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(qp_.H, col); it; ++it) {
        if (it.row() >= it.col()) {
          entries.emplace_back(it.row(), it.col(), it.value());
        }
      }
    }
    for (int col = 0; col < qp_.A.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(qp_.A, col); it; ++it) {
        entries.emplace_back(n_ + it.row(), it.col(), it.value());
      }
    }
    for (int col = 0; col < qp_.C.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(qp_.C, col); it; ++it) {
        entries.emplace_back(n_ + me_ + it.row(), it.col(), it.value());
      }
    }
    kkt_.resize(dim, dim);
    kkt_.setFromTriplets(entries.begin(), entries.end());
    kkt_.makeCompressed();
    diag_index_.resize(static_cast<std::size_t>(dim));
    base_diag_.resize(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      for (SparseMatrix::InnerIterator it(kkt_, k); it; ++it) {
        if (it.row() == k) {
          diag_index_[static_cast<std::size_t>(k)] = &it.valueRef() - kkt_.valuePtr();
          base_diag_(k) = it.value();
          break;
        }
      }
    }
    ldlt_.analyzePattern(kkt_);
  }

  void initialize(const VectorXd & guess)
  {
    it_.x = guess.size() == n_ ? guess : VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double lo = qp_.lower(i);
      const double hi = qp_.upper(i);
      double margin = 1e-2;
      if (std::isfinite(lo) && std::isfinite(hi)) {
        margin = std::min(margin, 0.25 * (hi - lo));
      }
      if (std::isfinite(lo)) it_.x(i) = std::max(it_.x(i), lo + margin);
      if (std::isfinite(hi)) it_.x(i) = std::min(it_.x(i), hi - margin);
    }
    it_.zl = VectorXd::Zero(n_);
    it_.zu = VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (has_l_[static_cast<std::size_t>(i)]) it_.zl(i) = 1.0;
      if (has_u_[static_cast<std::size_t>(i)]) it_.zu(i) = 1.0;
    }
    it_.lam = VectorXd::Zero(me_);
    it_.y = VectorXd::Constant(mi_, elastic_ ? std::min(1.0, 0.5 * mu_) : 1.0);
    const VectorXd ri = mi_ > 0 ? VectorXd(qp_.C * it_.x - qp_.d) : VectorXd(VectorXd::Zero(0));
    it_.s.resize(mi_);
    it_.t = VectorXd::Zero(mi_);
    for (Eigen::Index r = 0; r < mi_; ++r) {
      if (elastic_) {
        it_.s(r) = std::max(-ri(r), 0.0) + 1.0;
        it_.t(r) = std::max(ri(r), 0.0) + 1.0;
      } else {
        it_.s(r) = std::max(-ri(r), 1.0);
      }
    }
    it_.vp = VectorXd::Zero(me_);
    it_.vm = VectorXd::Zero(me_);
    if (elastic_ && me_ > 0) {
      const VectorXd re = qp_.A * it_.x - qp_.b;
      it_.vp = re.cwiseMax(0.0).array() + 1.0;
      it_.vm = (-re).cwiseMax(0.0).array() + 1.0;
    }
  }

  double gl(Eigen::Index i) const { return it_.x(i) - qp_.lower(i); }
  double gu(Eigen::Index i) const { return qp_.upper(i) - it_.x(i); }
  double wy(Eigen::Index r) const { return mu_ - it_.y(r); }
  double wp(Eigen::Index r) const { return mu_ - it_.lam(r); }
  double wm(Eigen::Index r) const { return mu_ + it_.lam(r); }

  void compute_residuals()
  {
    rd_ = qp_.H.selfadjointView<Eigen::Lower>() * it_.x + qp_.q - it_.zl + it_.zu;
    if (me_ > 0) {
      rd_ += qp_.A.transpose() * it_.lam;
      re_ = qp_.A * it_.x - qp_.b;
      if (elastic_) {
        re_ += -it_.vp + it_.vm;
      }
    } else {
      re_.resize(0);
    }
    if (mi_ > 0) {
      rd_ += qp_.C.transpose() * it_.y;
      ri_ = qp_.C * it_.x - qp_.d + it_.s - it_.t;
    } else {
      ri_.resize(0);
    }
  }

  double mean_complementarity() const
  {
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (has_l_[static_cast<std::size_t>(i)]) { sum += gl(i) * it_.zl(i); ++count; }
      if (has_u_[static_cast<std::size_t>(i)]) { sum += gu(i) * it_.zu(i); ++count; }
    }
    for (Eigen::Index r = 0; r < mi_; ++r) {
      sum += it_.s(r) * it_.y(r);
      ++count;
      if (elastic_) { sum += it_.t(r) * wy(r); ++count; }
    }
    if (elastic_) {
      for (Eigen::Index r = 0; r < me_; ++r) {
        sum += it_.vp(r) * wp(r) + it_.vm(r) * wm(r);
        count += 2;
      }
    }
    return count > 0 ? sum / count : 0.0;
  }

  double mean_complementarity_after(const Iterate & d, double a) const
  {
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (has_l_[static_cast<std::size_t>(i)]) {
        sum += (gl(i) + a * d.x(i)) * (it_.zl(i) + a * d.zl(i));
        ++count;
      }
      if (has_u_[static_cast<std::size_t>(i)]) {
        sum += (gu(i) - a * d.x(i)) * (it_.zu(i) + a * d.zu(i));
        ++count;
      }
    }
    for (Eigen::Index r = 0; r < mi_; ++r) {
      sum += (it_.s(r) + a * d.s(r)) * (it_.y(r) + a * d.y(r));
      ++count;
      if (elastic_) {
        sum += (it_.t(r) + a * d.t(r)) * (wy(r) - a * d.y(r));
        ++count;
      }
    }
    if (elastic_) {
      for (Eigen::Index r = 0; r < me_; ++r) {
        sum += (it_.vp(r) + a * d.vp(r)) * (wp(r) - a * d.lam(r));
        sum += (it_.vm(r) + a * d.vm(r)) * (wm(r) + a * d.lam(r));
        count += 2;
      }
    }
    return count > 0 ? sum / count : 0.0;
  }

  void update_and_factorize()
  {
    double * values = kkt_.valuePtr();
    dx_ = VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (has_l_[static_cast<std::size_t>(i)]) dx_(i) += it_.zl(i) / gl(i);
      if (has_u_[static_cast<std::size_t>(i)]) dx_(i) += it_.zu(i) / gu(i);
      values[diag_index_[static_cast<std::size_t>(i)]] = base_diag_(i) + dx_(i);
    }
    de_ = VectorXd::Zero(me_);
    for (Eigen::Index r = 0; r < me_; ++r) {
      if (elastic_) de_(r) = it_.vp(r) / wp(r) + it_.vm(r) / wm(r);
      values[diag_index_[static_cast<std::size_t>(n_ + r)]] = -de_(r);
    }
    di_ = VectorXd::Zero(mi_);
    for (Eigen::Index r = 0; r < mi_; ++r) {
      di_(r) = it_.s(r) / it_.y(r);
      if (elastic_) di_(r) += it_.t(r) / wy(r);
      values[diag_index_[static_cast<std::size_t>(n_ + me_ + r)]] = -di_(r);
    }
    // Escalate the regularization when the factorization breaks down.
    primal_reg_ = kPrimalReg;
    dual_reg_ = kDualReg;
    for (int attempt = 0;; ++attempt) {
      for (Eigen::Index i = 0; i < n_; ++i) values[diag_index_[static_cast<std::size_t>(i)]] += primal_reg_;
      for (Eigen::Index r = 0; r < me_; ++r) values[diag_index_[static_cast<std::size_t>(n_ + r)]] -= dual_reg_;
      ldlt_.factorize(kkt_);
      if (ldlt_.info() == Eigen::Success) break;
      if (attempt == 3) throw std::runtime_error("qp: KKT factorization failed");
      for (Eigen::Index i = 0; i < n_; ++i) values[diag_index_[static_cast<std::size_t>(i)]] -= primal_reg_;
      for (Eigen::Index r = 0; r < me_; ++r) values[diag_index_[static_cast<std::size_t>(n_ + r)]] += dual_reg_;
      primal_reg_ *= 100.0;
      dual_reg_ *= 100.0;
    }
  }

  // Product with the unregularized KKT matrix.
  VectorXd exact_product(const VectorXd & v) const
  {
    VectorXd out = kkt_.selfadjointView<Eigen::Lower>() * v;
    out.head(n_) -= primal_reg_ * v.head(n_);
    out.segment(n_, me_) += dual_reg_ * v.segment(n_, me_);
    return out;
  }

  ComplementarityRhs affine_rhs() const
  {
    ComplementarityRhs rc;
    rc.l = VectorXd::Zero(n_);
    rc.u = VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (has_l_[static_cast<std::size_t>(i)]) rc.l(i) = -gl(i) * it_.zl(i);
      if (has_u_[static_cast<std::size_t>(i)]) rc.u(i) = -gu(i) * it_.zu(i);
    }
    rc.r1 = -it_.s.cwiseProduct(it_.y);
    rc.r2 = VectorXd::Zero(mi_);
    rc.r3 = VectorXd::Zero(me_);
    rc.r4 = VectorXd::Zero(me_);
    if (elastic_) {
      for (Eigen::Index r = 0; r < mi_; ++r) rc.r2(r) = -it_.t(r) * wy(r);
      for (Eigen::Index r = 0; r < me_; ++r) {
        rc.r3(r) = -it_.vp(r) * wp(r);
        rc.r4(r) = -it_.vm(r) * wm(r);
      }
    }
    return rc;
  }

  void corrector_rhs(ComplementarityRhs & rc, const Iterate & aff, double target) const
  {
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (has_l_[static_cast<std::size_t>(i)]) rc.l(i) += target - aff.x(i) * aff.zl(i);
      if (has_u_[static_cast<std::size_t>(i)]) rc.u(i) += target + aff.x(i) * aff.zu(i);
    }
    for (Eigen::Index r = 0; r < mi_; ++r) {
      rc.r1(r) += target - aff.s(r) * aff.y(r);
      if (elastic_) rc.r2(r) += target + aff.t(r) * aff.y(r);
    }
    if (elastic_) {
      for (Eigen::Index r = 0; r < me_; ++r) {
        rc.r3(r) += target + aff.vp(r) * aff.lam(r);
        rc.r4(r) += target - aff.vm(r) * aff.lam(r);
      }
    }
  }

  Iterate direction(const ComplementarityRhs & rc) const
  {
    VectorXd rhs(n_ + me_ + mi_);
    VectorXd rx = -rd_;
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (has_l_[static_cast<std::size_t>(i)]) rx(i) += rc.l(i) / gl(i);
      if (has_u_[static_cast<std::size_t>(i)]) rx(i) -= rc.u(i) / gu(i);
    }
    rhs.head(n_) = rx;
    for (Eigen::Index r = 0; r < me_; ++r) {
      double v = -re_(r);
      if (elastic_) v += rc.r3(r) / wp(r) - rc.r4(r) / wm(r);
      rhs(n_ + r) = v;
    }
    for (Eigen::Index r = 0; r < mi_; ++r) {
      double v = -ri_(r) - rc.r1(r) / it_.y(r);
      if (elastic_) v += rc.r2(r) / wy(r);
      rhs(n_ + me_ + r) = v;
    }
    VectorXd sol = ldlt_.solve(rhs);
    for (int k = 0; k < kRefinementSteps; ++k) {
      const VectorXd res = rhs - exact_product(sol);
      sol += ldlt_.solve(res);
    }

    Iterate d;
    d.x = sol.head(n_);
    d.lam = sol.segment(n_, me_);
    d.y = sol.segment(n_ + me_, mi_);
    d.zl = VectorXd::Zero(n_);
    d.zu = VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (has_l_[static_cast<std::size_t>(i)]) d.zl(i) = (rc.l(i) - it_.zl(i) * d.x(i)) / gl(i);
      if (has_u_[static_cast<std::size_t>(i)]) d.zu(i) = (rc.u(i) + it_.zu(i) * d.x(i)) / gu(i);
    }
    d.s = (rc.r1 - it_.s.cwiseProduct(d.y)).cwiseQuotient(it_.y);
    d.t = VectorXd::Zero(mi_);
    d.vp = VectorXd::Zero(me_);
    d.vm = VectorXd::Zero(me_);
    if (elastic_) {
      for (Eigen::Index r = 0; r < mi_; ++r) d.t(r) = (rc.r2(r) + it_.t(r) * d.y(r)) / wy(r);
      for (Eigen::Index r = 0; r < me_; ++r) {
        d.vp(r) = (rc.r3(r) + it_.vp(r) * d.lam(r)) / wp(r);
        d.vm(r) = (rc.r4(r) - it_.vm(r) * d.lam(r)) / wm(r);
      }
    }
    return d;
  }

  double step_to_boundary(const Iterate & d, double fraction) const
  {
    double a = 1.0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (has_l_[static_cast<std::size_t>(i)]) {
        if (d.x(i) < 0.0) a = std::min(a, -fraction * gl(i) / d.x(i));
        if (d.zl(i) < 0.0) a = std::min(a, -fraction * it_.zl(i) / d.zl(i));
      }
      if (has_u_[static_cast<std::size_t>(i)]) {
        if (d.x(i) > 0.0) a = std::min(a, fraction * gu(i) / d.x(i));
        if (d.zu(i) < 0.0) a = std::min(a, -fraction * it_.zu(i) / d.zu(i));
      }
    }
    a = std::min(a, max_scaled(it_.s, d.s, fraction));
    a = std::min(a, max_scaled(it_.y, d.y, fraction));
    if (elastic_) {
      a = std::min(a, max_scaled(it_.t, d.t, fraction));
      a = std::min(a, max_scaled(it_.vp, d.vp, fraction));
      a = std::min(a, max_scaled(it_.vm, d.vm, fraction));
      for (Eigen::Index r = 0; r < mi_; ++r) {
        if (d.y(r) > 0.0) a = std::min(a, fraction * wy(r) / d.y(r));
      }
      for (Eigen::Index r = 0; r < me_; ++r) {
        if (d.lam(r) > 0.0) a = std::min(a, fraction * wp(r) / d.lam(r));
        if (d.lam(r) < 0.0) a = std::min(a, -fraction * wm(r) / d.lam(r));
      }
    }
    return a;
  }

  static double max_scaled(const VectorXd & v, const VectorXd & dv, double fraction)
  {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (dv(i) < 0.0) a = std::min(a, -fraction * v(i) / dv(i));
    }
    return a;
  }

  void apply(const Iterate & d, double a)
  {
    it_.x += a * d.x;
    it_.lam += a * d.lam;
    it_.y += a * d.y;
    it_.zl += a * d.zl;
    it_.zu += a * d.zu;
    it_.s += a * d.s;
    if (elastic_) {
      it_.t += a * d.t;
      it_.vp += a * d.vp;
      it_.vm += a * d.vm;
    }
  }

  const QpProblem & qp_;
  QpOptions options_;
  Eigen::Index n_{0}, me_{0}, mi_{0};
  double mu_{0.0};
  bool elastic_{false};
  std::vector<char> has_l_, has_u_;
  SparseMatrix kkt_;
  std::vector<Eigen::Index> diag_index_;
  VectorXd base_diag_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
  double primal_reg_{kPrimalReg};
  double dual_reg_{kDualReg};
  Iterate it_;
  VectorXd rd_, re_, ri_, dx_, de_, di_;
};
}  // namespace

QpResult solve_qp(const QpProblem & qp, const VectorXd & x_guess, const QpOptions & options)
{
  QpSolverImpl impl(qp, options);
  return impl.solve(x_guess);
}

}  // namespace tvapf::solver
