#pragma once

// Grid-based sparse reconstruction: minimize ||x||_1 subject to
// ||y - A x||_2 <= epsilon over complex x, with epsilon = 0 giving basis
// pursuit. The l1 norm of a complex vector is the sum of moduli.

#include "gridfree/core_model.hpp"

namespace gridfree {

struct BpdnProblem {
  CMatrix a;
  CVector y;
  double epsilon = 0.0;
};

struct BpdnOptions {
  double tol = 1e-6;
  int max_iter = 100000;
};

struct BpdnResult {
  CVector x;
  double l1_norm = 0.0;
  double residual_norm = 0.0;  // ||y - A x||
  double lower_bound = 0.0;    // certified dual bound on the optimum
  int iterations = 0;
  bool converged = false;      // ||x||_1 - lower_bound <= tol (1 + ||x||_1)
};

// ADMM with an exact projection onto the residual ball. Throws
// InfeasibleError when no x satisfies the residual constraint.
BpdnResult bpdn_solve(const BpdnProblem& p, const BpdnOptions& opts = {});

// Lower bound Re(c^H y) - epsilon ||c|| for any nonzero c, rescaled so that
// ||A^H c||_inf = 1. Never negative (c = 0 is always dual feasible).
double bpdn_dual_bound(const BpdnProblem& p, const CVector& c);

}  // namespace gridfree
