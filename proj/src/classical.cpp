#include "gridfree/classical.hpp"

#include <algorithm>
#include <cmath>

#include "gridfree/errors.hpp"

namespace gridfree {

namespace {

constexpr double kLoadingFactor = 1e-10;
constexpr double kSingularRatio = 1e-12;
constexpr double kIllConditioned = 1e10;

Spectrum reciprocal(const RVector& denom) {
  Spectrum s;
  s.power.resize(denom.size());
  for (Eigen::Index i = 0; i < denom.size(); ++i) {
    double d = denom(i);
    if (d <= kSpectrumFloor) {
      d = kSpectrumFloor;
      ++s.saturated;
    }
    s.power(i) = 1.0 / d;
  }
  return s;
}

// a(t)^H Psi a(t) over the grid.
RVector quadratic_form(const CMatrix& psi, const ArrayGeometry& geom,
                       std::span<const double> grid) {
  RVector out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CVector a = steering_vector(geom, grid[i]);
    out(static_cast<Eigen::Index>(i)) = a.dot(psi * a).real();
  }
  return out;
}

void require_uniform(const ArrayGeometry& geom, const char* what) {
  if (!geom.is_uniform()) throw DomainError(std::string(what) + " requires a uniform array");
}

}  // namespace

CVector cbf(const Snapshot& y, std::span<const double> grid) {
  return sensing_matrix(y.geometry, grid).adjoint() * y.y;
}

CVector min_l2(const Snapshot& y, std::span<const double> grid) {
  const CMatrix a = sensing_matrix(y.geometry, grid);
  const CMatrix gram = a * a.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev(0) <= kSingularRatio * ev(ev.size() - 1)) {
    throw SingularityError("min_l2: A A^H is rank deficient");
  }
  return a.adjoint() * gram.ldlt().solve(y.y);
}

CrossSpectral csm(std::span<const Snapshot> snapshots) {
  if (snapshots.empty()) throw DomainError("csm: need at least one snapshot");
  const auto& geom = snapshots.front().geometry;
  const auto m = geom.active_count();
  CrossSpectral out;
  out.geometry = geom;
  out.snapshots = static_cast<int>(snapshots.size());
  out.matrix = CMatrix::Zero(m, m);
  for (const auto& s : snapshots) {
    if (!(s.geometry == geom) || s.y.size() != m) {
      throw DomainError("csm: snapshots do not share one geometry");
    }
    out.matrix.noalias() += s.y * s.y.adjoint();
  }
  out.matrix /= static_cast<double>(snapshots.size());
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
  return out;
}

SubspaceSplit eig_split(const CrossSpectral& c, int sources) {
  const auto m = static_cast<int>(c.matrix.rows());
  if (sources < 1 || sources >= m) throw DomainError("eig_split: need 1 <= K < M");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(c.matrix);
  // Eigen returns ascending order.
  const RVector values = es.eigenvalues().reverse();
  const CMatrix vectors = es.eigenvectors().rowwise().reverse();
  SubspaceSplit out;
  out.geometry = c.geometry;
  out.signal_vectors = vectors.leftCols(sources);
  out.signal_values = values.head(sources);
  out.noise_vectors = vectors.rightCols(m - sources);
  out.noise_values = values.tail(m - sources);
  const double top = values(0);
  out.eigen_gap = top > 0.0 ? (values(sources - 1) - values(sources)) / top : 0.0;
  return out;
}

CMatrix mvdr_inverse(const CrossSpectral& c, bool* loaded) {
  const auto m = c.matrix.rows();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(c.matrix, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  CMatrix work = c.matrix;
  bool load = ev(0) <= kSingularRatio * std::max(ev(m - 1), 0.0);
  if (load) {
    const double delta = kLoadingFactor * c.matrix.trace().real() / static_cast<double>(m);
    if (!(delta > 0.0)) throw SingularityError("mvdr: cross-spectral matrix is zero");
    work += delta * CMatrix::Identity(m, m);
  }
  if (loaded) *loaded = load;
  Eigen::LLT<CMatrix> llt(work);
  if (llt.info() != Eigen::Success) throw SingularityError("mvdr: matrix is singular after loading");
  CMatrix inv = llt.solve(CMatrix::Identity(m, m));
  return 0.5 * (inv + inv.adjoint());
}

Spectrum mvdr_spectrum(const CrossSpectral& c, std::span<const double> grid) {
  bool loaded = false;
  const CMatrix inv = mvdr_inverse(c, &loaded);
  Spectrum s = reciprocal(quadratic_form(inv, c.geometry, grid));
  s.loaded = loaded;
  if (loaded) s.loading = kLoadingFactor * c.matrix.trace().real() / static_cast<double>(c.matrix.rows());
  return s;
}

Spectrum music_spectrum(const SubspaceSplit& split, std::span<const double> grid) {
  const CMatrix proj = split.noise_vectors * split.noise_vectors.adjoint();
  return reciprocal(quadratic_form(proj, split.geometry, grid));
}

CVector minnorm_vector(const SubspaceSplit& split, bool use_signal_form) {
  if (use_signal_form) {
    // v = (e1 - Us b^H) / (1 - ||b||^2), b = first row of Us.
    const CVector bh = split.signal_vectors.row(0).adjoint();
    const double denom = 1.0 - bh.squaredNorm();
    if (std::abs(denom) < 1e-12) throw DegenerateSubspaceError("minnorm: ||b|| = 1");
    CVector v = -(split.signal_vectors * bh) / denom;
    v(0) = 1.0;
    return v;
  }
  const CVector dh = split.noise_vectors.row(0).adjoint();
  const double dn = dh.squaredNorm();
  if (dn < 1e-12) throw DegenerateSubspaceError("minnorm: first row of the noise subspace vanishes");
  return split.noise_vectors * dh / dn;
}

Spectrum minnorm_spectrum(const CVector& v, const ArrayGeometry& geom,
                          std::span<const double> grid) {
  if (v.size() != geom.active_count()) throw DomainError("minnorm_spectrum: length mismatch");
  RVector denom(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    denom(static_cast<Eigen::Index>(i)) = std::norm(steering_vector(geom, grid[i]).dot(v));
  return reciprocal(denom);
}

std::vector<double> root_mvdr(const CrossSpectral& c, int sources, const RootSelection& sel) {
  require_uniform(c.geometry, "root MVDR");
  return support_from_null_spectrum(mvdr_inverse(c), sources, c.geometry.spacing_over_lambda(),
                                    sel);
}

std::vector<double> root_music(const SubspaceSplit& split, const RootSelection& sel) {
  require_uniform(split.geometry, "root MUSIC");
  const CMatrix proj = split.noise_vectors * split.noise_vectors.adjoint();
  return support_from_null_spectrum(proj, static_cast<int>(split.signal_vectors.cols()),
                                    split.geometry.spacing_over_lambda(), sel);
}

std::vector<double> root_minnorm(const CVector& v, const ArrayGeometry& geom, int sources,
                                 const RootSelection& sel) {
  require_uniform(geom, "root min-norm");
  return support_from_null_spectrum(v * v.adjoint(), sources, geom.spacing_over_lambda(), sel);
}

AmplitudeFit amplitudes_from_support(const Snapshot& y, std::span<const double> support) {
  AmplitudeFit fit;
  if (support.empty()) {
    fit.amplitudes = CVector(0);
    fit.residual_norm = y.y.norm();
    return fit;
  }
  if (static_cast<int>(support.size()) > y.geometry.active_count()) {
    throw SingularityError("amplitudes_from_support: more directions than sensors");
  }
  const CMatrix a = sensing_matrix(y.geometry, support);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 1e-14 * smax)) {
    throw SingularityError("amplitudes_from_support: steering vectors are linearly dependent");
  }
  fit.condition_number = smax / smin;
  fit.ill_conditioned = fit.condition_number > kIllConditioned;
  fit.amplitudes = svd.solve(y.y);
  fit.residual_norm = (y.y - a * fit.amplitudes).norm();
  return fit;
}

}  // namespace gridfree
