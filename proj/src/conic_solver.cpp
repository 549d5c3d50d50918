// Primal-dual path-following interior point method for the standard form in
// conic.hpp. Search direction: HKM (X dZ Z^-1 linearisation), Mehrotra
// predictor-corrector, infeasible start. Everything is dense; the problems
// this library builds have at most a few hundred equalities.

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridfree/conic.hpp"
#include "gridfree/errors.hpp"

namespace gridfree::conic {

namespace {

// Iterations without improvement of the convergence merit before giving up.
constexpr int kStagnationWindow = 15;

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Full symmetric listing of one constraint restricted to one block.
struct BlockPart {
  int block = 0;
  std::vector<int> rows, cols;
  std::vector<double> vals;
  std::vector<int> distinct_cols;  // sorted unique column indices
};

struct Model {
  std::vector<int> dims;
  int m = 0;
  int nf = 0;
  std::vector<std::vector<BlockPart>> parts;  // per equality
  MatrixXd F;                                 // m x nf
  std::vector<MatrixXd> C;
  VectorXd cf;
  VectorXd b;
  double sense = 1.0;  // -1 when the caller maximizes
};

void push_entry(BlockPart& p, int r, int c, double w) {
  p.rows.push_back(r);
  p.cols.push_back(c);
  p.vals.push_back(w);
}

std::vector<BlockPart> expand(const LinearFunctional& f) {
  std::vector<BlockPart> parts;
  for (const auto& e : f.psd) {
    auto it = std::find_if(parts.begin(), parts.end(),
                           [&](const BlockPart& p) { return p.block == e.block; });
    if (it == parts.end()) {
      parts.push_back(BlockPart{e.block, {}, {}, {}, {}});
      it = std::prev(parts.end());
    }
    const int r = std::min(e.row, e.col);
    const int c = std::max(e.row, e.col);
    if (r == c) {
      push_entry(*it, r, r, e.weight);
    } else {
      push_entry(*it, r, c, 0.5 * e.weight);
      push_entry(*it, c, r, 0.5 * e.weight);
    }
  }
  for (auto& p : parts) {
    p.distinct_cols = p.cols;
    std::sort(p.distinct_cols.begin(), p.distinct_cols.end());
    p.distinct_cols.erase(std::unique(p.distinct_cols.begin(), p.distinct_cols.end()),
                          p.distinct_cols.end());
  }
  return parts;
}

Model build_model(const ConicProblem& p) {
  Model md;
  md.dims = p.psd_blocks;
  md.m = static_cast<int>(p.equalities.size());
  md.nf = p.free_vars;
  md.sense = p.maximize ? -1.0 : 1.0;
  md.b.resize(md.m);
  md.F = MatrixXd::Zero(md.m, md.nf);
  md.parts.reserve(md.m);
  for (int i = 0; i < md.m; ++i) {
    const auto& eq = p.equalities[i];
    md.b(i) = eq.rhs;
    md.parts.push_back(expand(eq.lhs));
    for (const auto& [k, w] : eq.lhs.free) md.F(i, k) += w;
  }
  for (int n : md.dims) md.C.push_back(MatrixXd::Zero(n, n));
  md.cf = VectorXd::Zero(md.nf);
  for (const auto& part : expand(p.objective)) {
    for (std::size_t e = 0; e < part.vals.size(); ++e) {
      md.C[part.block](part.rows[e], part.cols[e]) += md.sense * part.vals[e];
    }
  }
  for (const auto& [k, w] : p.objective.free) md.cf(k) += md.sense * w;
  return md;
}

double inner(const BlockPart& p, const MatrixXd& x) {
  double s = 0.0;
  for (std::size_t e = 0; e < p.vals.size(); ++e) s += p.vals[e] * x(p.rows[e], p.cols[e]);
  return s;
}

VectorXd apply_a(const Model& md, const std::vector<MatrixXd>& x) {
  VectorXd out(md.m);
  for (int i = 0; i < md.m; ++i) {
    double s = 0.0;
    for (const auto& part : md.parts[i]) s += inner(part, x[part.block]);
    out(i) = s;
  }
  return out;
}

std::vector<MatrixXd> apply_at(const Model& md, const VectorXd& y) {
  std::vector<MatrixXd> out;
  for (int n : md.dims) out.push_back(MatrixXd::Zero(n, n));
  for (int i = 0; i < md.m; ++i) {
    if (y(i) == 0.0) continue;
    for (const auto& part : md.parts[i]) {
      auto& z = out[part.block];
      for (std::size_t e = 0; e < part.vals.size(); ++e) {
        z(part.rows[e], part.cols[e]) += y(i) * part.vals[e];
      }
    }
  }
  return out;
}

double frob_dot(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

double frob_norm(const std::vector<MatrixXd>& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

MatrixXd sym(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Schur complement S(i, j) = <A_i, X A_j Z^-1>.
MatrixXd schur(const Model& md, const std::vector<MatrixXd>& x,
               const std::vector<MatrixXd>& zinv) {
  MatrixXd s = MatrixXd::Zero(md.m, md.m);
  std::vector<int> local;
  for (int j = 0; j < md.m; ++j) {
    for (const auto& pj : md.parts[j]) {
      const int k = pj.block;
      const int n = md.dims[k];
      const auto& cols = pj.distinct_cols;
      local.assign(n, -1);
      for (std::size_t q = 0; q < cols.size(); ++q) local[cols[q]] = static_cast<int>(q);
      // T = X A_j restricted to the nonzero columns of A_j.
      MatrixXd t = MatrixXd::Zero(n, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t e = 0; e < pj.vals.size(); ++e) {
        t.col(local[pj.cols[e]]) += pj.vals[e] * x[k].col(pj.rows[e]);
      }
      MatrixXd zrows(static_cast<Eigen::Index>(cols.size()), n);
      for (std::size_t q = 0; q < cols.size(); ++q) zrows.row(q) = zinv[k].row(cols[q]);
      const MatrixXd g = t * zrows;
      for (int i = 0; i < md.m; ++i) {
        for (const auto& pi : md.parts[i]) {
          if (pi.block == k) s(i, j) += inner(pi, g);
        }
      }
    }
  }
  return 0.5 * (s + s.transpose());
}

// Largest step alpha with x + alpha * dx PSD (infinity when unbounded).
double max_step(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatrixXd l_inv_dx = llt.matrixL().solve(dx);
  const MatrixXd m = llt.matrixL().solve(l_inv_dx.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(m), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

bool invert_spd(const MatrixXd& z, MatrixXd& zinv) {
  Eigen::LLT<MatrixXd> llt(z);
  if (llt.info() != Eigen::Success) return false;
  zinv = llt.solve(MatrixXd::Identity(z.rows(), z.cols()));
  zinv = sym(zinv);
  return true;
}

struct NewtonSystem {
  const Model& md;
  MatrixXd schur_matrix;
  Eigen::LDLT<MatrixXd> ldlt;
  Eigen::PartialPivLU<MatrixXd> lu;
  MatrixXd kkt;

  NewtonSystem(const Model& model, MatrixXd s) : md(model), schur_matrix(std::move(s)) {
    if (md.nf == 0) {
      ldlt.compute(schur_matrix);
    } else {
      kkt = MatrixXd::Zero(md.m + md.nf, md.m + md.nf);
      kkt.topLeftCorner(md.m, md.m) = schur_matrix;
      kkt.topRightCorner(md.m, md.nf) = md.F;
      kkt.bottomLeftCorner(md.nf, md.m) = md.F.transpose();
      lu.compute(kkt);
    }
  }

  // Solves [[S, F], [F', 0]] [dy; dxf] = [h; rf] with one refinement pass.
  void solve(const VectorXd& h, const VectorXd& rf, VectorXd& dy, VectorXd& dxf) const {
    if (md.nf == 0) {
      dy = ldlt.solve(h);
      dy += ldlt.solve(h - schur_matrix * dy);
      dxf.resize(0);
      return;
    }
    VectorXd rhs(md.m + md.nf);
    rhs << h, rf;
    VectorXd sol = lu.solve(rhs);
    sol += lu.solve(rhs - kkt * sol);
    dy = sol.head(md.m);
    dxf = sol.tail(md.nf);
  }
};

}  // namespace

void LinearFunctional::add(int block, int row, int col, double weight) {
  if (weight == 0.0) return;
  psd.push_back(BlockEntry{block, std::min(row, col), std::max(row, col), weight});
}

int ConicProblem::add_block(int dim) {
  psd_blocks.push_back(dim);
  return static_cast<int>(psd_blocks.size()) - 1;
}

void ConicProblem::validate() const {
  if (psd_blocks.empty() && free_vars == 0) throw DomainError("conic problem has no variables");
  for (int d : psd_blocks)
    if (d < 1) throw DomainError("PSD block dimension must be >= 1");
  if (free_vars < 0) throw DomainError("negative free variable count");
  auto check = [&](const LinearFunctional& f) {
    for (const auto& e : f.psd) {
      if (e.block < 0 || e.block >= static_cast<int>(psd_blocks.size()))
        throw DomainError("functional references unknown block");
      const int n = psd_blocks[e.block];
      if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n)
        throw DomainError("functional entry outside block");
      if (!std::isfinite(e.weight)) throw DomainError("non-finite coefficient");
    }
    for (const auto& [k, w] : f.free) {
      if (k < 0 || k >= free_vars) throw DomainError("functional references unknown free var");
      if (!std::isfinite(w)) throw DomainError("non-finite coefficient");
    }
  };
  check(objective);
  for (const auto& eq : equalities) {
    check(eq.lhs);
    if (!std::isfinite(eq.rhs)) throw DomainError("non-finite right-hand side");
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

double evaluate(const LinearFunctional& f, const std::vector<MatrixXd>& blocks,
                const VectorXd& free) {
  double s = 0.0;
  for (const auto& e : f.psd) s += e.weight * blocks.at(e.block)(e.row, e.col);
  for (const auto& [k, w] : f.free) s += w * free(k);
  return s;
}

ConicSolution solve(const ConicProblem& problem, const SolverOptions& opts) {
  problem.validate();
  const Model md = build_model(problem);
  const int nb = static_cast<int>(md.dims.size());
  int n_total = 0;
  for (int n : md.dims) n_total += n;

  // Initial point in the spirit of SDPT3: scaled identities.
  double a_norm_max = 0.0;
  double ratio_max = 0.0;
  for (int i = 0; i < md.m; ++i) {
    double s = 0.0;
    for (const auto& p : md.parts[i])
      for (double v : p.vals) s += v * v;
    s = std::sqrt(s + md.F.row(i).squaredNorm());
    a_norm_max = std::max(a_norm_max, s);
    ratio_max = std::max(ratio_max, (1.0 + std::abs(md.b(i))) / (1.0 + s));
  }
  double c_norm = 0.0;
  for (const auto& c : md.C) c_norm += c.squaredNorm();
  c_norm = std::sqrt(c_norm + md.cf.squaredNorm());
  const double n_max = md.dims.empty() ? 1.0 : *std::max_element(md.dims.begin(), md.dims.end());
  const double xi = std::max({10.0, std::sqrt(n_max), n_max * ratio_max});
  const double eta = std::max({10.0, std::sqrt(n_max), c_norm, a_norm_max});

  std::vector<MatrixXd> x, z;
  for (int n : md.dims) {
    x.push_back(xi * MatrixXd::Identity(n, n));
    z.push_back(eta * MatrixXd::Identity(n, n));
  }
  VectorXd xf = VectorXd::Zero(md.nf);
  VectorXd y = VectorXd::Zero(md.m);

  const double b_norm = md.b.norm();
  ConicSolution sol;
  sol.status = SolveStatus::max_iter;

  auto finish = [&](int iters) {
    sol.blocks = x;
    sol.slacks = z;
    sol.free = xf;
    sol.multipliers = y;
    sol.iterations = iters;
    const double pobj = frob_dot(md.C, x) + md.cf.dot(xf);
    const double dobj = md.b.dot(y);
    sol.objective_value = md.sense * pobj;
    sol.dual_objective = md.sense * dobj;
  };

  struct Iterate {
    double merit = std::numeric_limits<double>::infinity();
    std::vector<MatrixXd> x, z;
    VectorXd xf, y;
    double gap = 0.0, pinf = 0.0, dinf = 0.0;
    int iter = 0;
  } best;

  int stalled = 0;
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    // Residuals and convergence measures.
    const VectorXd rp = md.b - apply_a(md, x) - md.F * xf;
    const auto aty = apply_at(md, y);
    std::vector<MatrixXd> rd(nb);
    for (int k = 0; k < nb; ++k) rd[k] = md.C[k] - aty[k] - z[k];
    const VectorXd rf = md.cf - md.F.transpose() * y;
    const double pobj = frob_dot(md.C, x) + md.cf.dot(xf);
    const double dobj = md.b.dot(y);
    const double xz = frob_dot(x, z);
    const double pinf = rp.norm() / (1.0 + b_norm);
    const double dinf =
        std::sqrt(std::pow(frob_norm(rd), 2) + rf.squaredNorm()) / (1.0 + c_norm);
    const double gap = std::max(std::abs(pobj - dobj), xz) / (1.0 + std::abs(pobj) + std::abs(dobj));

    sol.duality_gap = gap;
    sol.primal_infeasibility = pinf;
    sol.dual_infeasibility = dinf;

    if (gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol) {
      sol.status = SolveStatus::optimal;
      finish(iter);
      return sol;
    }
    const double merit = std::max({gap / opts.gap_tol, pinf / opts.feas_tol, dinf / opts.feas_tol});
    if (merit < best.merit) {
      best = {merit, x, z, xf, y, gap, pinf, dinf, iter};
    } else if (iter - best.iter >= kStagnationWindow) {
      break;
    }
    if (iter == opts.max_iter) break;

    // Divergence of either side certifies (numerically) an infeasible pair.
    double x_trace = 0.0;
    for (const auto& xm : x) x_trace += xm.trace();
    if (x_trace > 1e12 * xi * n_total || y.norm() > 1e12 * (1.0 + eta)) {
      sol.status = SolveStatus::infeasible;
      finish(iter);
      return sol;
    }

    std::vector<MatrixXd> zinv(nb);
    bool ok = true;
    for (int k = 0; k < nb; ++k) ok = ok && invert_spd(z[k], zinv[k]);
    if (!ok) break;

    const double mu = xz / n_total;
    const NewtonSystem sys(md, schur(md, x, zinv));

    // Direction for complementarity target sigma*mu with optional corrector.
    auto direction = [&](double sigma, const std::vector<MatrixXd>* corr,
                         std::vector<MatrixXd>& dx, VectorXd& dy, VectorXd& dxf,
                         std::vector<MatrixXd>& dz) {
      std::vector<MatrixXd> r0(nb);
      for (int k = 0; k < nb; ++k) {
        r0[k] = sigma * mu * zinv[k] - x[k] - x[k] * rd[k] * zinv[k];
        if (corr) r0[k] -= (*corr)[k];
      }
      const VectorXd h = rp - apply_a(md, r0);
      sys.solve(h, rf, dy, dxf);
      const auto atdy = apply_at(md, dy);
      dx.resize(nb);
      dz.resize(nb);
      for (int k = 0; k < nb; ++k) {
        dz[k] = rd[k] - atdy[k];
        dx[k] = sym(r0[k] + x[k] * atdy[k] * zinv[k]);
      }
    };

    auto step_lengths = [&](const std::vector<MatrixXd>& dx, const std::vector<MatrixXd>& dz,
                            double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(x[k], dx[k]));
        ad = std::min(ad, max_step(z[k], dz[k]));
      }
    };

    // Predictor.
    std::vector<MatrixXd> dx, dz;
    VectorXd dy, dxf;
    direction(0.0, nullptr, dx, dy, dxf, dz);
    double ap = 0.0, ad = 0.0;
    step_lengths(dx, dz, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xz_aff = 0.0;
    for (int k = 0; k < nb; ++k)
      xz_aff += (x[k] + ap * dx[k]).cwiseProduct(z[k] + ad * dz[k]).sum();
    const double mu_aff = std::max(xz_aff, 0.0) / n_total;
    double sigma = std::pow(mu_aff / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    std::vector<MatrixXd> corr(nb);
    for (int k = 0; k < nb; ++k) corr[k] = dx[k] * dz[k] * zinv[k];
    direction(sigma, &corr, dx, dy, dxf, dz);
    step_lengths(dx, dz, ap, ad);
    const double gamma = 0.98;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    if (ap < 1e-10 && ad < 1e-10) {
      if (++stalled >= 3) {
        sol.iterations = iter;
        break;
      }
    } else {
      stalled = 0;
    }

    for (int k = 0; k < nb; ++k) {
      x[k] = sym(x[k] + ap * dx[k]);
      z[k] = sym(z[k] + ad * dz[k]);
    }
    if (md.nf > 0) xf += ap * dxf;
    y += ad * dy;
    sol.iterations = iter + 1;
  }
  // Not converged: hand back the best iterate seen.
  const int iters = sol.iterations;
  if (!best.x.empty()) {
    x = best.x;
    z = best.z;
    xf = best.xf;
    y = best.y;
    sol.duality_gap = best.gap;
    sol.primal_infeasibility = best.pinf;
    sol.dual_infeasibility = best.dinf;
  }
  finish(iters);
  return sol;
}

}  // namespace gridfree::conic
