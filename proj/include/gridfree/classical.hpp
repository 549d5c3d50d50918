#pragma once

// Baseline estimators: conventional and minimum-l2 beamforming, the
// cross-spectral matrix, subspace methods and their root forms, and
// least-squares amplitudes on a fixed support.

#include <span>
#include <vector>

#include "gridfree/core_model.hpp"
#include "gridfree/rooting.hpp"

namespace gridfree {

// Denominator floor for every spectrum; a point at the floor is saturated.
inline constexpr double kSpectrumFloor = 1e-30;

CVector cbf(const Snapshot& y, std::span<const double> grid);

// x = A^H (A A^H)^-1 y. Throws SingularityError when A A^H is rank deficient.
CVector min_l2(const Snapshot& y, std::span<const double> grid);

struct CrossSpectral {
  CMatrix matrix;
  int snapshots = 0;
  ArrayGeometry geometry = ArrayGeometry::ula(2, 0.5);
};

// (1/L) sum y_l y_l^H. All snapshots must share a geometry.
CrossSpectral csm(std::span<const Snapshot> snapshots);

struct SubspaceSplit {
  CMatrix signal_vectors;  // M x K
  RVector signal_values;   // descending
  CMatrix noise_vectors;   // M x (M - K)
  RVector noise_values;    // descending
  // (lambda_K - lambda_{K+1}) / lambda_1; zero when the split is arbitrary.
  double eigen_gap = 0.0;
  ArrayGeometry geometry = ArrayGeometry::ula(2, 0.5);
};

SubspaceSplit eig_split(const CrossSpectral& c, int sources);

struct Spectrum {
  RVector power;       // linear power per grid point
  int saturated = 0;   // points whose denominator hit kSpectrumFloor
  bool loaded = false; // diagonal loading applied (MVDR only)
  double loading = 0.0;
};

// 1 / (a^H C^-1 a). A numerically singular C is loaded with 1e-10 trace/M.
Spectrum mvdr_spectrum(const CrossSpectral& c, std::span<const double> grid);
Spectrum music_spectrum(const SubspaceSplit& split, std::span<const double> grid);

// Unit-first-element vector in the noise subspace, built from the noise
// eigenvectors or, equivalently, from the signal eigenvectors.
CVector minnorm_vector(const SubspaceSplit& split, bool use_signal_form);
Spectrum minnorm_spectrum(const CVector& v, const ArrayGeometry& geom,
                          std::span<const double> grid);

// C^-1 with the same loading rule as mvdr_spectrum.
CMatrix mvdr_inverse(const CrossSpectral& c, bool* loaded = nullptr);

// Root forms. `sources` is the model order K.
std::vector<double> root_mvdr(const CrossSpectral& c, int sources, const RootSelection& sel = {});
std::vector<double> root_music(const SubspaceSplit& split, const RootSelection& sel = {});
std::vector<double> root_minnorm(const CVector& v, const ArrayGeometry& geom, int sources,
                                 const RootSelection& sel = {});

struct AmplitudeFit {
  CVector amplitudes;
  double condition_number = 1.0;
  bool ill_conditioned = false;  // condition number above 1e10
  double residual_norm = 0.0;    // ||y - A_T x||
};

// Least-squares amplitudes on the given support. Throws SingularityError when
// the steering vectors are linearly dependent.
AmplitudeFit amplitudes_from_support(const Snapshot& y, std::span<const double> support);

}  // namespace gridfree
