#pragma once

// Dual semidefinite programs for atomic-norm denoising and the grid-free
// estimation pipeline built on them.
//
// Problem layout shared by every builder: block 0 is the realified Hermitian
// matrix [[Q, c], [c^H, 1]] of dimension slots + 1, with c in column `slots`.
// The noisy builder appends block 1, the norm block of `soc_as_psd(slots)`,
// whose vector column is tied to c.

#include <span>
#include <string>
#include <vector>

#include "gridfree/conic.hpp"
#include "gridfree/core_model.hpp"
#include "gridfree/rooting.hpp"

namespace gridfree {

struct DualVector {
  CVector c;  // over all slots; inactive entries vanish to solver tolerance
  ArrayGeometry geometry = ArrayGeometry::ula(2, 0.5);
  double epsilon = 0.0;
};

// Maximize Re(c^H y) s.t. [[Q, c], [c^H, 1]] >= 0 and sum_i Q(i, i+j) = delta_j.
conic::ConicProblem build_dual_sdp(const Snapshot& y);

// As above with objective Re(c^H y) - epsilon * tau and ||c|| <= tau.
// epsilon = 0 returns exactly build_dual_sdp(y).
conic::ConicProblem build_dual_sdp_noisy(const Snapshot& y, double epsilon);

// Adds Re c_m = Im c_m = 0 for each inactive slot. No-op for a full ULA.
conic::ConicProblem apply_null_constraints(conic::ConicProblem p, const ArrayGeometry& geom);

// Reads c out of a solved problem. When solver tolerance lets max |H| exceed 1,
// c is shrunk by a certified bound so the result is dual feasible.
DualVector extract_dual_vector(const conic::ConicSolution& sol, const ArrayGeometry& geom,
                               double epsilon);

// H(t) = sum_m c_m exp(-j 2 pi (d/lambda) t m).
Complex dual_poly_eval(const DualVector& d, double t);

// Re(c^H y) - epsilon ||c||.
double dual_objective(const DualVector& d, const Snapshot& y);

struct GridFreeOptions {
  conic::SolverOptions solver{1e-11, 1e-10, 200};
  RootSelection roots;
};

struct DoaEstimate {
  std::vector<double> support;  // ascending t-values
  CVector amplitudes;
  DualVector dual;
  double dual_objective = 0.0;
  double duality_gap_check = 0.0;  // |dual objective - sum |x_i||
  std::vector<double> root_residuals;

  conic::SolveStatus solver_status = conic::SolveStatus::optimal;
  double solver_gap = 0.0;
  int iterations = 0;
  bool low_confidence = false;   // solver stopped before reaching tolerance
  bool unresolvable = false;     // no usable certificate (see notes)
  bool ill_conditioned = false;  // amplitude fit close to rank deficient
  std::vector<std::string> notes;
};

// Dual SDP -> null constraints -> solve -> rooting -> least-squares amplitudes.
// Data are normalized by ||y|| before solving. The estimate is flagged
// unresolvable when the polynomial is constant, when more than k_max(slots)
// roots land on the circle, or, for epsilon = 0, when the recovered support
// does not reproduce y.
DoaEstimate grid_free_solve(const Snapshot& y, double epsilon, const GridFreeOptions& opts = {});

// |H(t)| over a grid.
RVector dual_poly_magnitude(const DualVector& d, std::span<const double> grid);

}  // namespace gridfree
