#include "gridfree/discrete_cs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "gridfree/errors.hpp"

namespace gridfree {

namespace {

// Euclidean projection onto {x : ||A x - y|| <= eps} through the thin SVD.
// Along the row space the KKT conditions give w_i = (zh_i + mu s_i yh_i) /
// (1 + mu s_i^2); mu >= 0 is found by bisection on the residual norm.
class BallProjector {
 public:
  BallProjector(const CMatrix& a, const CVector& y, double eps) : eps_(eps) {
    Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-12 * (sv.size() ? sv(0) : 0.0);
    rank_ = 0;
    while (rank_ < sv.size() && sv(rank_) > cutoff) ++rank_;
    s_ = sv.head(rank_);
    u_ = svd.matrixU().leftCols(rank_);
    v_ = svd.matrixV().leftCols(rank_);
    yh_ = u_.adjoint() * y;
    perp_ = (y - u_ * yh_).norm();
    const double scale = 1.0 + y.norm();
    if (perp_ > eps_ + 1e-10 * scale) {
      throw InfeasibleError("bpdn: residual constraint cannot be met (distance to range " +
                            std::to_string(perp_) + ")");
    }
    affine_ = eps_ * eps_ - perp_ * perp_ <= 1e-24 * scale * scale;
  }

  CVector project(const CVector& z) const {
    const CVector zh = v_.adjoint() * z;
    const CVector r0 = s_.cwiseProduct(zh) - yh_;
    CVector w(rank_);
    if (affine_) {
      w = yh_.cwiseQuotient(s_.cast<Complex>());
    } else {
      const double target = eps_ * eps_ - perp_ * perp_;
      auto resid = [&](double mu) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < rank_; ++i)
          acc += std::norm(r0(i)) / std::pow(1.0 + mu * s_(i) * s_(i), 2);
        return acc;
      };
      if (resid(0.0) <= target) return z;
      double lo = 0.0, hi = 1.0;
      while (resid(hi) > target && hi < 1e300) hi *= 4.0;
      for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        (resid(mid) > target ? lo : hi) = mid;
      }
      for (Eigen::Index i = 0; i < rank_; ++i)
        w(i) = (zh(i) + hi * s_(i) * yh_(i)) / (1.0 + hi * s_(i) * s_(i));
    }
    return z + v_ * (w - zh);
  }

 private:
  double eps_;
  Eigen::Index rank_ = 0;
  RVector s_;
  CMatrix u_, v_;
  CVector yh_;
  double perp_ = 0.0;
  bool affine_ = false;
};

// The penalty adapts every kAdaptEvery iterations during warm-up and then only
// at doubling iteration counts; finitely many changes keep ADMM convergent.
constexpr int kAdaptIterations = 2000;
constexpr int kAdaptEvery = 50;

bool adapt_at(int it) {
  if (it <= kAdaptIterations) return it % kAdaptEvery == 0;
  return it % kAdaptIterations == 0 && std::has_single_bit(static_cast<unsigned>(it / kAdaptIterations));
}

CVector soft_threshold(const CVector& z, double kappa) {
  CVector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double mag = std::abs(z(i));
    out(i) = mag > kappa ? z(i) * ((mag - kappa) / mag) : Complex(0.0, 0.0);
  }
  return out;
}

}  // namespace

double bpdn_dual_bound(const BpdnProblem& p, const CVector& c) {
  const double inf = (p.a.adjoint() * c).cwiseAbs().maxCoeff();
  if (!(inf > 0.0) || !std::isfinite(inf)) return 0.0;
  const CVector cs = c / inf;
  return std::max(0.0, cs.dot(p.y).real() - p.epsilon * cs.norm());
}

BpdnResult bpdn_solve(const BpdnProblem& p, const BpdnOptions& opts) {
  if (p.a.rows() != p.y.size() || p.a.cols() < 1) throw DomainError("bpdn: dimension mismatch");
  if (!(p.epsilon >= 0.0) || !std::isfinite(p.epsilon)) throw DomainError("bpdn: epsilon must be >= 0");
  if (!p.a.allFinite() || !p.y.allFinite()) throw DomainError("bpdn: non-finite data");

  const BallProjector proj(p.a, p.y, p.epsilon);
  const auto n = p.a.cols();
  BpdnResult best;
  best.x = CVector::Zero(n);

  if (p.y.norm() <= p.epsilon) {
    best.residual_norm = p.y.norm();
    best.converged = true;
    return best;
  }

  const auto ls = p.a.adjoint().bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV);
  CVector v = CVector::Zero(n);
  CVector u = CVector::Zero(n);
  CVector x = proj.project(v);
  double rho = 1.0 / std::max(1e-12, x.cwiseAbs().maxCoeff());
  double best_gap = std::numeric_limits<double>::infinity();
  best.x = x;
  best.l1_norm = x.cwiseAbs().sum();

  for (int it = 1; it <= opts.max_iter; ++it) {
    x = proj.project(v - u);
    const CVector v_prev = v;
    v = soft_threshold(x + u, 1.0 / rho);
    u += x - v;

    if (it % 10 == 0 || it == opts.max_iter) {
      const double l1 = x.cwiseAbs().sum();
      // Multiplier of x = v is rho * u; the best c with A^H c ~ rho u certifies.
      const CVector c = ls.solve(rho * u);
      const double bound = std::max(bpdn_dual_bound(p, c), bpdn_dual_bound(p, p.y - p.a * x));
      const double gap = l1 - bound;
      if (gap < best_gap) {
        best_gap = gap;
        best.x = x;
        best.l1_norm = l1;
        best.lower_bound = bound;
        best.iterations = it;
      }
      if (gap <= opts.tol * (1.0 + l1)) {
        best.converged = true;
        break;
      }
      if (!adapt_at(it)) continue;
      const double r = (x - v).norm();
      const double s = rho * (v - v_prev).norm();
      if (r > 10.0 * s) {
        rho *= 2.0;
        u /= 2.0;
      } else if (s > 10.0 * r) {
        rho /= 2.0;
        u *= 2.0;
      }
    }
  }
  best.residual_norm = (p.y - p.a * best.x).norm();
  return best;
}

}  // namespace gridfree
