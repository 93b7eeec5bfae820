#include "qctol/optimize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/LU>

namespace qctol {

namespace {

constexpr double kPivotTol = 1e-11;
// Primal infeasibility tolerated per ratio-test step.
constexpr double kFeasTol = 1e-9;
// Pivots between refactorizations of the basis.
constexpr int kRefactorEvery = 50;

// Tableau layout: rows 0..m-1 are constraints, row m is the objective
// (reduced costs, minimization). Last column is the right-hand side.
// The constraint rows are rebuilt from the original data every
// kRefactorEvery pivots, so elimination error cannot pile up.
class Tableau {
 public:
  explicit Tableau(RealMatrix constraints)
      : original_(std::move(constraints)),
        t_(RealMatrix::Zero(original_.rows() + 1, original_.cols())),
        basis_(static_cast<std::size_t>(original_.rows())) {
    t_.topRows(rows()) = original_;
  }

  RealMatrix& data() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  Eigen::Index rows() const { return original_.rows(); }
  Eigen::Index cols() const { return original_.cols() - 1; }

  // Cost per column (right-hand side excluded); resets the objective row.
  void set_cost(RealVector cost) {
    cost_ = std::move(cost);
    price();
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index r = 0; r < t_.rows(); ++r) {
      if (r == row) continue;
      const double f = t_(r, col);
      if (f != 0.0) t_.row(r) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  void refactor() {
    const Eigen::Index m = rows();
    RealMatrix b(m, m);
    for (Eigen::Index r = 0; r < m; ++r) b.col(r) = original_.col(basis_[r]);
    const Eigen::PartialPivLU<RealMatrix> lu(b);
    t_.topRows(m) = lu.solve(original_);
    price();
  }

  // Runs simplex iterations over columns [0, usable). Returns false if unbounded.
  // Dantzig pricing; after a run of degenerate pivots, Bland's rule until the
  // objective moves again. Optimality is only accepted on a fresh factorization.
  bool optimize(Eigen::Index usable) {
    const Eigen::Index m = rows();
    const Eigen::Index rhs = cols();
    int degenerate = 0;
    int since_refactor = 0;
    for (int iter = 0; iter < 100000; ++iter) {
      const bool bland = degenerate > 20;
      Eigen::Index enter = -1;
      double most = -kPivotTol;
      for (Eigen::Index c = 0; c < usable; ++c) {
        if (t_(m, c) < most) {
          enter = c;
          if (bland) break;
          most = t_(m, c);
        }
      }
      if (enter < 0) {
        if (since_refactor == 0) return true;
        refactor();
        since_refactor = 0;
        continue;
      }
      // Harris two-pass ratio test: the step may overshoot a row by at most
      // kFeasTol, which frees the choice of a large pivot among near ties.
      double step = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m; ++r) {
        const double a = t_(r, enter);
        if (a > kPivotTol) step = std::min(step, (std::max(0.0, t_(r, rhs)) + kFeasTol) / a);
      }
      Eigen::Index leave = -1;
      double best = 0.0;
      for (Eigen::Index r = 0; r < m; ++r) {
        const double a = t_(r, enter);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(0.0, t_(r, rhs)) / a;
        if (ratio > step) continue;
        const bool better = leave < 0 || (bland ? basis_[r] < basis_[leave] : a > t_(leave, enter));
        if (better) {
          leave = r;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      degenerate = best * std::abs(t_(m, enter)) <= 1e-14 ? degenerate + 1 : 0;
      pivot(leave, enter);
      if (++since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
    }
    throw std::runtime_error("simplex iteration limit reached");
  }

 private:
  // Objective row: cost minus the basic costs carried through the rows.
  void price() {
    const Eigen::Index m = rows();
    t_.row(m).setZero();
    t_.row(m).head(cost_.size()) = cost_.transpose();
    for (Eigen::Index r = 0; r < m; ++r) {
      const double cb = basis_[r] < cost_.size() ? cost_(basis_[r]) : 0.0;
      if (cb != 0.0) t_.row(m) -= cb * t_.row(r);
    }
  }

  RealMatrix original_;
  RealMatrix t_;
  std::vector<Eigen::Index> basis_;
  RealVector cost_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const Eigen::Index n = lp.c.size();
  const Eigen::Index m_ub = lp.a_ub.rows();
  const Eigen::Index m_eq = lp.a_eq.rows();
  if ((m_ub > 0 && lp.a_ub.cols() != n) || (m_eq > 0 && lp.a_eq.cols() != n) || lp.b_ub.size() != m_ub ||
      lp.b_eq.size() != m_eq)
    throw std::invalid_argument("linear program dimensions are inconsistent");
  const Eigen::Index m = m_ub + m_eq;

  // Columns: x (n), slacks (m_ub), artificials (m), right-hand side.
  const Eigen::Index n_slack = m_ub;
  const Eigen::Index art0 = n + n_slack;
  const Eigen::Index rhs = art0 + m;
  RealMatrix a = RealMatrix::Zero(m, rhs + 1);
  for (Eigen::Index i = 0; i < m_ub; ++i) {
    const double sign = lp.b_ub(i) < 0 ? -1.0 : 1.0;
    a.row(i).head(n) = sign * lp.a_ub.row(i);
    a(i, n + i) = sign;
    a(i, rhs) = sign * lp.b_ub(i);
  }
  for (Eigen::Index i = 0; i < m_eq; ++i) {
    const Eigen::Index r = m_ub + i;
    const double sign = lp.b_eq(i) < 0 ? -1.0 : 1.0;
    a.row(r).head(n) = sign * lp.a_eq.row(i);
    a(r, rhs) = sign * lp.b_eq(i);
  }
  for (Eigen::Index r = 0; r < m; ++r) a(r, art0 + r) = 1.0;

  Tableau tab(std::move(a));
  RealMatrix& t = tab.data();
  for (Eigen::Index r = 0; r < m; ++r) tab.basis()[r] = art0 + r;

  // Phase 1: minimize the sum of artificials.
  RealVector phase1 = RealVector::Zero(rhs);
  phase1.tail(m).setOnes();
  tab.set_cost(phase1);
  tab.optimize(rhs);
  LpResult result;
  if (-t(m, rhs) > 1e-8) {
    result.status = LpStatus::kInfeasible;
    return result;
  }
  // Drive remaining artificials out of the basis.
  for (Eigen::Index r = 0; r < m; ++r) {
    if (tab.basis()[r] < art0) continue;
    Eigen::Index best = -1;
    for (Eigen::Index c = 0; c < art0; ++c)
      if (std::abs(t(r, c)) > kPivotTol && (best < 0 || std::abs(t(r, c)) > std::abs(t(r, best)))) best = c;
    if (best >= 0) tab.pivot(r, best);
  }

  // Phase 2; artificial columns may no longer enter.
  RealVector phase2 = RealVector::Zero(rhs);
  phase2.head(n) = lp.c;
  tab.refactor();
  tab.set_cost(phase2);
  if (!tab.optimize(art0)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }
  result.status = LpStatus::kOptimal;
  result.x = RealVector::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r)
    if (tab.basis()[r] < n) result.x(tab.basis()[r]) = std::max(0.0, t(r, rhs));
  result.objective = lp.c.dot(result.x);
  return result;
}

NnlsResult nnls(const RealMatrix& a, const RealVector& b, int max_iterations, double tol) {
  const Eigen::Index n = a.cols();
  if (a.rows() != b.size()) throw std::invalid_argument("nnls: dimension mismatch");
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * n + 50);
  RealVector x = RealVector::Zero(n);
  std::vector<bool> passive(n, false);
  NnlsResult out;

  auto solve_passive = [&](RealVector& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    RealMatrix ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const RealVector zp = ap.colPivHouseholderQr().solve(b);
    z = RealVector::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
  };

  RealVector w = a.transpose() * (b - a * x);
  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::Index best = -1;
    double best_w = tol * std::max(1.0, b.norm());
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) break;
    passive[best] = true;
    out.iterations = iter + 1;

    for (int inner = 0; inner < 10 * static_cast<int>(n) + 10; ++inner) {
      RealVector z;
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0) feasible = false;
      if (feasible) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && x(j) <= 1e-15) {
          passive[j] = false;
          x(j) = 0.0;
        }
    }
    w = a.transpose() * (b - a * x);
  }
  out.x = x;
  out.residual = (a * x - b).norm();
  return out;
}

}  // namespace qctol
