#pragma once

// Polynomial construction and unit-circle root extraction.
//
// Convention: on the unit circle z = exp(j * 2*pi*(d/lambda) * t). With this
// choice |H(t)|^2 = sum_m r_m z^m where r is the autocorrelation of the dual
// coefficients, and a(t)^H Psi a(t) = sum_l psi_l z^-l for the null spectrum.
// Roots map back through t = arg(z) / (2*pi*d/lambda).

#include <vector>

#include "gridfree/core_model.hpp"

namespace gridfree {

// Laurent polynomial sum_{m=-D}^{D} coeff(m) z^m.
class LaurentPoly {
 public:
  LaurentPoly() = default;
  // `coeffs` holds 2D+1 values ordered m = -D .. D.
  explicit LaurentPoly(std::vector<Complex> coeffs);

  int degree() const { return static_cast<int>(coeffs_.size() / 2); }
  Complex coeff(int m) const { return coeffs_.at(static_cast<std::size_t>(m + degree())); }
  const std::vector<Complex>& coeffs() const { return coeffs_; }

  Complex eval(Complex z) const;
  // Value at z = exp(j * 2*pi*(d/lambda) * t).
  Complex eval_at(double t, double spacing_over_lambda) const;
  // Largest |coeff(-m) - conj(coeff(m))|.
  double hermitian_defect() const;

 private:
  std::vector<Complex> coeffs_;
};

struct UnitRootSet {
  std::vector<double> angles;     // arg z in (-pi, pi], one per cluster
  std::vector<double> residuals;  // smallest |1 - |z|| within the cluster
  std::vector<double> t_values;   // visible-region directions (|t| <= 1)
  std::vector<int> multiplicity;  // raw roots merged into each cluster
};

struct RootSelection {
  double unit_circle_tol = 1e-2;
  double angle_tol = 1e-3;  // radians
};

// r_m = sum_l c_l conj(c_{l+m}) for m >= 0, r_{-m} = conj(r_m).
LaurentPoly autocorrelation(const CVector& c);

// Ascending coefficients of P+(z) = z^{D} (1 - R(z)), degree 2D.
std::vector<Complex> build_p_plus(const LaurentPoly& r);

// All roots of sum_k coeffs[k] z^k (ascending order) by eigenvalues of the
// balanced companion matrix. Zero low-order coefficients contribute roots at
// the origin; zero high-order coefficients lower the degree.
std::vector<Complex> poly_roots(const std::vector<Complex>& coeffs);

// Keeps roots with |1 - |z|| < tol, merges those whose angles differ by less
// than angle_tol (weighted toward the root closest to the circle) and maps
// angles to t. Clusters outside the visible region |t| <= 1 are dropped.
UnitRootSet select_unit_circle(const std::vector<Complex>& roots, double spacing_over_lambda,
                               const RootSelection& sel = {});

struct DualVector;

// Max |P+ coefficient| below which the dual polynomial is treated as constant.
inline constexpr double kDegenerateCoefficientTol = 1e-7;

// autocorrelation -> build_p_plus -> poly_roots -> select_unit_circle.
// Throws UnresolvableSignalError when |H| is (numerically) constant.
UnitRootSet unit_roots_from_dual(const DualVector& d, const RootSelection& sel = {});
std::vector<double> support_from_dual(const DualVector& d, const RootSelection& sel = {});

// psi_l = sum_{m-n=l} Psi(m, n); returned so that eval_at(t) = a(t)^H Psi a(t).
LaurentPoly null_spectrum_poly(const CMatrix& psi);

// K directions from the roots of z^{M-1} N(z) closest to the unit circle
// (inside or on it), one per conjugate-reciprocal pair.
std::vector<double> support_from_null_spectrum(const CMatrix& psi, int sources,
                                               double spacing_over_lambda,
                                               const RootSelection& sel = {});

}  // namespace gridfree
