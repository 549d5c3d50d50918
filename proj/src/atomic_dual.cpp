#include "gridfree/atomic_dual.hpp"

#include <algorithm>
#include <cmath>

#include "gridfree/classical.hpp"
#include "gridfree/errors.hpp"

namespace gridfree {

namespace {

constexpr int kGramBlock = 0;
// Relative residual above which a noiseless support is not a certificate.
constexpr double kReproductionTol = 1e-3;

void check_finite(const Snapshot& y) {
  if (!y.y.allFinite()) throw DomainError("snapshot contains non-finite entries");
  if (y.y.size() != y.geometry.active_count()) {
    throw DomainError("snapshot length does not match the active sensor count");
  }
}

}  // namespace

conic::ConicProblem build_dual_sdp(const Snapshot& y) {
  check_finite(y);
  const int n = y.geometry.slots();
  const conic::HermitianEmbedding emb(n + 1);
  conic::ConicProblem p;
  p.maximize = true;
  p.add_block(emb.real_dim());

  const CVector data = y.on_slots();
  for (int i = 0; i < n; ++i) {
    if (data(i).real() != 0.0) emb.add_real(p.objective, kGramBlock, i, n, data(i).real());
    if (data(i).imag() != 0.0) emb.add_imag(p.objective, kGramBlock, i, n, data(i).imag());
  }

  conic::Equality corner;
  emb.add_real(corner.lhs, kGramBlock, n, n, 1.0);
  corner.rhs = 1.0;
  p.equalities.push_back(std::move(corner));

  conic::Equality diag;
  for (int i = 0; i < n; ++i) emb.add_real(diag.lhs, kGramBlock, i, i, 1.0);
  diag.rhs = 1.0;
  p.equalities.push_back(std::move(diag));

  for (int j = 1; j < n; ++j) {
    conic::Equality re, im;
    for (int i = 0; i + j < n; ++i) {
      emb.add_real(re.lhs, kGramBlock, i, i + j, 1.0);
      emb.add_imag(im.lhs, kGramBlock, i, i + j, 1.0);
    }
    p.equalities.push_back(std::move(re));
    p.equalities.push_back(std::move(im));
  }
  return p;
}

conic::ConicProblem build_dual_sdp_noisy(const Snapshot& y, double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("epsilon must be finite and >= 0");
  }
  auto p = build_dual_sdp(y);
  if (epsilon == 0.0) return p;

  const int n = y.geometry.slots();
  const conic::HermitianEmbedding gram(n + 1);
  const auto norm = conic::soc_as_psd(n);
  const int block = norm.append_to(p);
  for (int i = 0; i < n; ++i) {
    conic::Equality re, im;
    gram.add_real(re.lhs, kGramBlock, i, n, 1.0);
    norm.add_vector_real(re.lhs, block, i, -1.0);
    gram.add_imag(im.lhs, kGramBlock, i, n, 1.0);
    norm.add_vector_imag(im.lhs, block, i, -1.0);
    p.equalities.push_back(std::move(re));
    p.equalities.push_back(std::move(im));
  }
  norm.add_bound(p.objective, block, -epsilon);
  return p;
}

conic::ConicProblem apply_null_constraints(conic::ConicProblem p, const ArrayGeometry& geom) {
  const int n = geom.slots();
  if (p.psd_blocks.empty() || p.psd_blocks[kGramBlock] != 2 * (n + 1)) {
    throw DomainError("apply_null_constraints: problem was not built over this slot grid");
  }
  const conic::HermitianEmbedding emb(n + 1);
  for (int m : geom.inactive_slots()) {
    conic::Equality re, im;
    emb.add_real(re.lhs, kGramBlock, m, n, 1.0);
    emb.add_imag(im.lhs, kGramBlock, m, n, 1.0);
    p.equalities.push_back(std::move(re));
    p.equalities.push_back(std::move(im));
  }
  return p;
}

DualVector extract_dual_vector(const conic::ConicSolution& sol, const ArrayGeometry& geom,
                               double epsilon) {
  const int n = geom.slots();
  if (sol.blocks.empty() || sol.blocks[kGramBlock].rows() != 2 * (n + 1)) {
    throw DomainError("extract_dual_vector: solution does not match the geometry");
  }
  const conic::HermitianEmbedding emb(n + 1);
  const CMatrix s = emb.extract(sol.blocks[kGramBlock]);

  DualVector d;
  d.geometry = geom;
  d.epsilon = epsilon;
  d.c = s.col(n).head(n);

  // For [[Q, c], [c^H, s]] + delta I >= 0 the Schur complement gives
  // |a^H c|^2 <= (s + delta) a^H (Q + delta I) a, and a^H Q a is bounded by the
  // absolute diagonal sums of Q.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s, Eigen::EigenvaluesOnly);
  const double delta = std::max(0.0, -es.eigenvalues()(0));
  double bound = 0.0;
  for (int j = 0; j < n; ++j) {
    Complex q{0.0, 0.0};
    for (int i = 0; i + j < n; ++i) q += s(i, i + j);
    bound += (j == 0 ? std::abs(q.real()) + n * delta : 2.0 * std::abs(q));
  }
  bound *= s(n, n).real() + delta;
  if (bound > 1.0) d.c /= std::sqrt(bound);
  return d;
}

Complex dual_poly_eval(const DualVector& d, double t) {
  const double w = d.geometry.phase_rate() * t;
  Complex acc{0.0, 0.0};
  for (Eigen::Index m = d.c.size() - 1; m >= 0; --m) acc = acc * std::polar(1.0, -w) + d.c(m);
  return acc;
}

RVector dual_poly_magnitude(const DualVector& d, std::span<const double> grid) {
  RVector out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) out(static_cast<Eigen::Index>(i)) = std::abs(dual_poly_eval(d, grid[i]));
  return out;
}

double dual_objective(const DualVector& d, const Snapshot& y) {
  const CVector data = y.on_slots();
  return d.c.dot(data).real() - d.epsilon * d.c.norm();
}

DoaEstimate grid_free_solve(const Snapshot& y, double epsilon, const GridFreeOptions& opts) {
  check_finite(y);
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("epsilon must be finite and >= 0");
  }
  const ArrayGeometry& geom = y.geometry;
  DoaEstimate est;
  est.dual.geometry = geom;
  est.dual.epsilon = epsilon;
  est.dual.c = CVector::Zero(geom.slots());
  est.amplitudes = CVector(0);

  const double scale = y.y.norm();
  if (scale == 0.0 || epsilon >= scale) {
    est.notes.push_back(scale == 0.0 ? "zero data" : "epsilon covers the whole measurement");
    return est;
  }

  Snapshot normalized = y;
  normalized.y /= scale;
  const double eps_n = epsilon / scale;

  auto problem = apply_null_constraints(build_dual_sdp_noisy(normalized, eps_n), geom);
  const auto sol = conic::solve(problem, opts.solver);
  if (sol.status == conic::SolveStatus::infeasible) {
    throw Error("grid_free_solve: solver reported infeasibility");
  }
  est.solver_status = sol.status;
  est.solver_gap = sol.duality_gap;
  est.iterations = sol.iterations;
  est.low_confidence = sol.status != conic::SolveStatus::optimal;
  if (est.low_confidence) est.notes.push_back("solver stopped before reaching tolerance");

  est.dual = extract_dual_vector(sol, geom, epsilon);
  est.dual_objective = dual_objective(est.dual, y);

  UnitRootSet roots;
  try {
    roots = unit_roots_from_dual(est.dual, opts.roots);
  } catch (const UnresolvableSignalError&) {
    est.unresolvable = true;
    est.notes.push_back("non-informative dual polynomial");
    return est;
  }

  std::vector<std::size_t> order(roots.t_values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return roots.t_values[a] < roots.t_values[b]; });
  for (auto i : order) {
    est.support.push_back(roots.t_values[i]);
    est.root_residuals.push_back(roots.residuals[i]);
  }

  const int limit = k_max(geom.slots());
  if (static_cast<int>(est.support.size()) > limit) {
    est.unresolvable = true;
    est.notes.push_back("more unit-circle roots than k_max");
  }
  if (est.support.empty()) {
    est.notes.push_back("no unit-circle roots");
    est.duality_gap_check = std::abs(est.dual_objective);
    return est;
  }
  if (static_cast<int>(est.support.size()) > geom.active_count()) return est;

  try {
    const auto fit = amplitudes_from_support(y, est.support);
    est.amplitudes = fit.amplitudes;
    est.ill_conditioned = fit.ill_conditioned;
    if (fit.ill_conditioned) est.notes.push_back("amplitude fit is ill-conditioned");
    est.duality_gap_check = std::abs(est.dual_objective - fit.amplitudes.cwiseAbs().sum());
    if (epsilon == 0.0 && fit.residual_norm > kReproductionTol * scale) {
      est.unresolvable = true;
      est.notes.push_back("recovered support does not reproduce the data");
    }
  } catch (const SingularityError&) {
    est.unresolvable = true;
    est.notes.push_back("support steering vectors are linearly dependent");
  }
  return est;
}

}  // namespace gridfree
