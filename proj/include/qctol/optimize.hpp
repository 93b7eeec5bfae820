#pragma once

#include "qctol/qmath.hpp"

namespace qctol {

/// minimize c.x  subject to  a_ub x <= b_ub,  a_eq x = b_eq,  x >= 0.
/// Empty matrices mean "no constraints of that kind".
struct LinearProgram {
  RealVector c;
  RealMatrix a_ub;
  RealVector b_ub;
  RealMatrix a_eq;
  RealVector b_eq;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  RealVector x;
  double objective = 0.0;
};

// Two-phase dense tableau simplex with a Harris ratio test. The basis is
// refactored from the original data every 50 pivots.
LpResult solve_lp(const LinearProgram& lp);

struct NnlsResult {
  RealVector x;
  double residual = 0.0;  // ||a x - b||_2
  int iterations = 0;
};

// Lawson-Hanson active-set non-negative least squares.
NnlsResult nnls(const RealMatrix& a, const RealVector& b, int max_iterations = 0, double tol = 1e-12);

}  // namespace qctol
