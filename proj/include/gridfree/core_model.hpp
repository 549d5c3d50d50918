#pragma once

// Array geometry, plane-wave synthesis, seeded noise and resolvability bounds.
//
// Directions are carried as t = sin(theta) in [-1, 1] everywhere in the
// library; degrees only appear at the command-line boundary.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gridfree {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

double deg_to_t(double degrees);
double t_to_deg(double t);

// A linear array described as a masked uniform line of `slots` positions with
// spacing d. Slot m carries the phase exponent m; inactive slots are kept so
// that non-uniform arrays retain their place on the underlying uniform grid.
class ArrayGeometry {
 public:
  static ArrayGeometry ula(int sensors, double spacing_over_lambda);
  static ArrayGeometry masked(std::vector<bool> active, double spacing_over_lambda);
  // `count` active slots drawn without replacement from a ULA of `slots`
  // positions. The first and last slots are always kept so the aperture
  // matches the full array.
  static ArrayGeometry random_subset(int slots, int count, std::uint64_t seed,
                                     double spacing_over_lambda);

  double spacing_over_lambda() const { return spacing_; }
  int slots() const { return static_cast<int>(active_.size()); }
  int active_count() const { return active_count_; }
  const std::vector<bool>& active() const { return active_; }
  bool is_active(int slot) const { return active_.at(slot); }
  bool is_uniform() const { return active_count_ == slots(); }
  std::vector<int> active_slots() const;
  std::vector<int> inactive_slots() const;

  // Electrical angle per unit of t: 2*pi*d/lambda.
  double phase_rate() const { return 2.0 * kPi * spacing_; }

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;

 private:
  ArrayGeometry(std::vector<bool> active, double spacing);

  std::vector<bool> active_;
  double spacing_ = 0.5;
  int active_count_ = 0;
};

struct Source {
  double t = 0.0;
  Complex amplitude{1.0, 0.0};
};

// K point sources on the continuous domain [-1, 1].
class SourceScene {
 public:
  SourceScene() = default;
  explicit SourceScene(std::vector<Source> sources);

  const std::vector<Source>& sources() const { return sources_; }
  std::size_t size() const { return sources_.size(); }
  bool empty() const { return sources_.empty(); }
  std::vector<double> support() const;
  CVector amplitudes() const;

 private:
  std::vector<Source> sources_;
};

// One narrowband measurement vector over the active sensors.
struct Snapshot {
  CVector y;
  ArrayGeometry geometry = ArrayGeometry::ula(2, 0.5);
  std::optional<double> snr_db;
  // Noise norm actually injected by add_noise; zero for clean data.
  double noise_norm = 0.0;

  // y scattered onto the full slot grid, zero at inactive slots.
  CVector on_slots() const;
};

CVector steering_vector(const ArrayGeometry& geom, double t);
CMatrix sensing_matrix(const ArrayGeometry& geom, std::span<const double> grid);
Snapshot synthesize(const ArrayGeometry& geom, const SourceScene& scene);

// Adds iid complex Gaussian noise rescaled so that ||n|| = ||y|| 10^(-snr/20)
// exactly. snr_db = +inf returns the snapshot unchanged.
Snapshot add_noise(const Snapshot& s, double snr_db, std::uint64_t seed);

// Deterministic complex Gaussian vector: mt19937_64 feeding Box-Muller, two
// independent standard normals per entry (real, imaginary).
CVector complex_gaussian(int length, std::uint64_t seed);

int k_max(int sensors);
double min_separation(const ArrayGeometry& geom);
double wraparound_distance(double t1, double t2);

// Uniform grid from `start` to `stop` (inclusive) with the given step, in
// degrees, returned as t-values.
std::vector<double> degree_grid(double start, double stop, double step);

}  // namespace gridfree
