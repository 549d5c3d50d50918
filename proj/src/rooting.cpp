#include "gridfree/rooting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridfree/atomic_dual.hpp"
#include "gridfree/errors.hpp"

namespace gridfree {

namespace {

// Parlett-Reinsch balancing with radix-2 scaling so that no rounding is
// introduced.
void balance(CMatrix& a) {
  const double radix = 2.0;
  const double sqrdx = radix * radix;
  const auto n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

// Residuals below this weigh equally, so the two halves of a split double root
// contribute symmetrically and the mean angle is accurate to first order.
constexpr double kResidualFloor = 1e-6;

double circular_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

struct Cluster {
  std::vector<Complex> members;
  double min_residual = 0.0;
  double angle = 0.0;
};

// Groups roots by angle (sorted, chained within angle_tol, wrapping at +-pi).
std::vector<Cluster> cluster_by_angle(std::vector<Complex> roots, double angle_tol) {
  std::sort(roots.begin(), roots.end(),
            [](Complex a, Complex b) { return std::arg(a) < std::arg(b); });
  std::vector<std::vector<Complex>> groups;
  for (const auto& z : roots) {
    if (!groups.empty() && circular_diff(std::arg(groups.back().back()), std::arg(z)) < angle_tol) {
      groups.back().push_back(z);
    } else {
      groups.push_back({z});
    }
  }
  if (groups.size() > 1 &&
      circular_diff(std::arg(groups.back().back()), std::arg(groups.front().front())) < angle_tol) {
    groups.front().insert(groups.front().end(), groups.back().begin(), groups.back().end());
    groups.pop_back();
  }
  std::vector<Cluster> out;
  for (auto& g : groups) {
    Cluster c;
    c.members = std::move(g);
    Complex acc{0.0, 0.0};
    c.min_residual = std::numeric_limits<double>::infinity();
    for (const auto& z : c.members) {
      const double res = std::abs(1.0 - std::abs(z));
      c.min_residual = std::min(c.min_residual, res);
      acc += std::polar(1.0 / (std::abs(std::log(std::abs(z))) + kResidualFloor), std::arg(z));
    }
    c.angle = std::arg(acc);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

LaurentPoly::LaurentPoly(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.size() % 2 != 1) throw DomainError("LaurentPoly needs an odd coefficient count");
}

Complex LaurentPoly::eval(Complex z) const {
  // Horner on z^D * L(z), then divide by z^D.
  Complex acc{0.0, 0.0};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc / std::pow(z, degree());
}

Complex LaurentPoly::eval_at(double t, double spacing_over_lambda) const {
  const double w = 2.0 * kPi * spacing_over_lambda * t;
  Complex acc{0.0, 0.0};
  for (int m = -degree(); m <= degree(); ++m) acc += coeff(m) * std::polar(1.0, w * m);
  return acc;
}

double LaurentPoly::hermitian_defect() const {
  double worst = 0.0;
  for (int m = 0; m <= degree(); ++m)
    worst = std::max(worst, std::abs(coeff(-m) - std::conj(coeff(m))));
  return worst;
}

LaurentPoly autocorrelation(const CVector& c) {
  const auto n = static_cast<int>(c.size());
  if (n < 1) throw DomainError("autocorrelation: empty vector");
  std::vector<Complex> coeffs(2 * n - 1);
  for (int m = 0; m < n; ++m) {
    Complex r{0.0, 0.0};
    for (int l = 0; l + m < n; ++l) r += c(l) * std::conj(c(l + m));
    coeffs[n - 1 + m] = r;
    coeffs[n - 1 - m] = std::conj(r);
  }
  coeffs[n - 1] = Complex(coeffs[n - 1].real(), 0.0);
  return LaurentPoly(std::move(coeffs));
}

std::vector<Complex> build_p_plus(const LaurentPoly& r) {
  const int d = r.degree();
  std::vector<Complex> p(2 * d + 1);
  for (int m = -d; m <= d; ++m) p[m + d] = -r.coeff(m);
  p[d] += 1.0;
  return p;
}

std::vector<Complex> poly_roots(const std::vector<Complex>& coeffs) {
  std::size_t lo = 0;
  while (lo < coeffs.size() && coeffs[lo] == Complex(0.0, 0.0)) ++lo;
  if (lo == coeffs.size()) throw DegeneratePolynomialError("poly_roots: all coefficients are zero");
  std::size_t hi = coeffs.size() - 1;
  while (coeffs[hi] == Complex(0.0, 0.0)) --hi;

  std::vector<Complex> roots(lo, Complex(0.0, 0.0));
  const auto n = static_cast<Eigen::Index>(hi - lo);
  if (n == 0) return roots;
  if (n == 1) {
    roots.push_back(-coeffs[lo] / coeffs[hi]);
    return roots;
  }
  CMatrix companion = CMatrix::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) companion(i, n - 1) = -coeffs[lo + i] / coeffs[hi];
  balance(companion);
  Eigen::ComplexEigenSolver<CMatrix> es(companion, false);
  if (es.info() != Eigen::Success) throw Error("poly_roots: eigenvalue iteration failed");
  for (Eigen::Index i = 0; i < n; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

UnitRootSet select_unit_circle(const std::vector<Complex>& roots, double spacing_over_lambda,
                               const RootSelection& sel) {
  if (!(sel.unit_circle_tol > 0.0)) throw DomainError("select_unit_circle: tol must be > 0");
  std::vector<Complex> near;
  for (const auto& z : roots)
    if (std::abs(1.0 - std::abs(z)) < sel.unit_circle_tol) near.push_back(z);

  UnitRootSet out;
  const double rate = 2.0 * kPi * spacing_over_lambda;
  for (const auto& c : cluster_by_angle(std::move(near), sel.angle_tol)) {
    double t = c.angle / rate;
    if (std::abs(t) > 1.0 + 1e-12) continue;
    t = std::clamp(t, -1.0, 1.0);
    out.angles.push_back(c.angle);
    out.residuals.push_back(c.min_residual);
    out.t_values.push_back(t);
    out.multiplicity.push_back(static_cast<int>(c.members.size()));
  }
  return out;
}

UnitRootSet unit_roots_from_dual(const DualVector& d, const RootSelection& sel) {
  const auto p = build_p_plus(autocorrelation(d.c));
  double largest = 0.0;
  for (const auto& v : p) largest = std::max(largest, std::abs(v));
  if (largest <= kDegenerateCoefficientTol) {
    throw UnresolvableSignalError("dual polynomial has constant modulus; no support information");
  }
  return select_unit_circle(poly_roots(p), d.geometry.spacing_over_lambda(), sel);
}

std::vector<double> support_from_dual(const DualVector& d, const RootSelection& sel) {
  auto t = unit_roots_from_dual(d, sel).t_values;
  std::sort(t.begin(), t.end());
  return t;
}

LaurentPoly null_spectrum_poly(const CMatrix& psi) {
  if (psi.rows() != psi.cols() || psi.rows() < 1) throw DomainError("null_spectrum_poly: not square");
  const double scale = 1.0 + psi.norm();
  if ((psi - psi.adjoint()).norm() > 1e-9 * scale) {
    throw DomainError("null_spectrum_poly: matrix is not Hermitian");
  }
  const auto n = static_cast<int>(psi.rows());
  // coefficient of z^m is psi_{-m}.
  std::vector<Complex> coeffs(2 * n - 1, Complex(0.0, 0.0));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) coeffs[static_cast<std::size_t>(c - r + n - 1)] += psi(r, c);
  return LaurentPoly(std::move(coeffs));
}

std::vector<double> support_from_null_spectrum(const CMatrix& psi, int sources,
                                               double spacing_over_lambda,
                                               const RootSelection& sel) {
  if (sources < 1) throw DomainError("support_from_null_spectrum: K must be >= 1");
  const auto poly = null_spectrum_poly(psi);
  const auto roots = poly_roots(poly.coeffs());
  const double rate = 2.0 * kPi * spacing_over_lambda;

  std::vector<Complex> inside;
  for (const auto& z : roots) {
    if (std::abs(z) > 1.0 + 1e-6 || std::abs(z) == 0.0) continue;
    if (std::abs(std::arg(z) / rate) > 1.0 + 1e-12) continue;
    inside.push_back(z);
  }
  auto clusters = cluster_by_angle(std::move(inside), sel.angle_tol);
  if (static_cast<int>(clusters.size()) < sources) {
    throw InsufficientRootsError("support_from_null_spectrum: found " +
                                 std::to_string(clusters.size()) + " admissible roots, need " +
                                 std::to_string(sources));
  }
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return a.min_residual < b.min_residual;
  });
  std::vector<double> t;
  for (int k = 0; k < sources; ++k)
    t.push_back(std::clamp(clusters[k].angle / rate, -1.0, 1.0));
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace gridfree
