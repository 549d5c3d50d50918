#include "gridfree/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "gridfree/errors.hpp"

namespace gridfree {

namespace {

void require_t(double t, const char* what) {
  if (!(t >= -1.0 && t <= 1.0)) {
    throw DomainError(std::string(what) + ": t = " + std::to_string(t) +
                      " outside [-1, 1]");
  }
}

// 53-bit uniform in (0, 1], independent of the standard library's
// distribution implementations.
double uniform_open(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

double deg_to_t(double degrees) { return std::sin(degrees * kPi / 180.0); }

double t_to_deg(double t) { return std::asin(std::clamp(t, -1.0, 1.0)) * 180.0 / kPi; }

ArrayGeometry::ArrayGeometry(std::vector<bool> active, double spacing)
    : active_(std::move(active)), spacing_(spacing) {
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) {
    throw DomainError("spacing_over_lambda must be positive and finite");
  }
  active_count_ = static_cast<int>(std::count(active_.begin(), active_.end(), true));
  if (active_count_ < 2) throw DomainError("array needs at least two active sensors");
}

ArrayGeometry ArrayGeometry::ula(int sensors, double spacing_over_lambda) {
  if (sensors < 2) throw DomainError("array needs at least two sensors");
  return ArrayGeometry(std::vector<bool>(sensors, true), spacing_over_lambda);
}

ArrayGeometry ArrayGeometry::masked(std::vector<bool> active, double spacing_over_lambda) {
  return ArrayGeometry(std::move(active), spacing_over_lambda);
}

ArrayGeometry ArrayGeometry::random_subset(int slots, int count, std::uint64_t seed,
                                           double spacing_over_lambda) {
  if (slots < 2 || count < 2 || count > slots) {
    throw DomainError("random_subset: need 2 <= count <= slots");
  }
  std::vector<int> interior(slots - 2);
  std::iota(interior.begin(), interior.end(), 1);
  std::mt19937_64 gen(seed);
  // Fisher-Yates driven by raw generator output for cross-platform stability.
  for (int i = static_cast<int>(interior.size()) - 1; i > 0; --i) {
    const auto j = static_cast<int>(gen() % static_cast<std::uint64_t>(i + 1));
    std::swap(interior[i], interior[j]);
  }
  std::vector<bool> active(slots, false);
  active.front() = true;
  active.back() = true;
  for (int k = 0; k < count - 2; ++k) active[interior[k]] = true;
  return ArrayGeometry(std::move(active), spacing_over_lambda);
}

std::vector<int> ArrayGeometry::active_slots() const {
  std::vector<int> out;
  out.reserve(active_count_);
  for (int m = 0; m < slots(); ++m)
    if (active_[m]) out.push_back(m);
  return out;
}

std::vector<int> ArrayGeometry::inactive_slots() const {
  std::vector<int> out;
  for (int m = 0; m < slots(); ++m)
    if (!active_[m]) out.push_back(m);
  return out;
}

SourceScene::SourceScene(std::vector<Source> sources) : sources_(std::move(sources)) {
  std::set<double> seen;
  for (const auto& s : sources_) {
    require_t(s.t, "SourceScene");
    if (!std::isfinite(s.amplitude.real()) || !std::isfinite(s.amplitude.imag())) {
      throw DomainError("SourceScene: non-finite amplitude");
    }
    if (!seen.insert(s.t).second) throw DomainError("SourceScene: duplicate t-value");
  }
}

std::vector<double> SourceScene::support() const {
  std::vector<double> out;
  out.reserve(sources_.size());
  for (const auto& s : sources_) out.push_back(s.t);
  return out;
}

CVector SourceScene::amplitudes() const {
  CVector out(static_cast<Eigen::Index>(sources_.size()));
  for (std::size_t i = 0; i < sources_.size(); ++i) out(i) = sources_[i].amplitude;
  return out;
}

CVector Snapshot::on_slots() const {
  CVector full = CVector::Zero(geometry.slots());
  const auto slots = geometry.active_slots();
  for (std::size_t k = 0; k < slots.size(); ++k) full(slots[k]) = y(k);
  return full;
}

CVector steering_vector(const ArrayGeometry& geom, double t) {
  require_t(t, "steering_vector");
  const auto slots = geom.active_slots();
  CVector a(static_cast<Eigen::Index>(slots.size()));
  const double w = geom.phase_rate() * t;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    a(k) = std::polar(1.0, w * slots[k]);
  }
  return a;
}

CMatrix sensing_matrix(const ArrayGeometry& geom, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("sensing_matrix: empty grid");
  CMatrix A(geom.active_count(), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) A.col(i) = steering_vector(geom, grid[i]);
  return A;
}

Snapshot synthesize(const ArrayGeometry& geom, const SourceScene& scene) {
  Snapshot s;
  s.geometry = geom;
  s.y = CVector::Zero(geom.active_count());
  for (const auto& src : scene.sources()) s.y += src.amplitude * steering_vector(geom, src.t);
  return s;
}

CVector complex_gaussian(int length, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  CVector n(length);
  for (int i = 0; i < length; ++i) {
    const double u1 = uniform_open(gen);
    const double u2 = uniform_open(gen);
    const double r = std::sqrt(-2.0 * std::log(u1));
    n(i) = Complex(r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2));
  }
  return n;
}

Snapshot add_noise(const Snapshot& s, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return s;
  if (!std::isfinite(snr_db)) throw DomainError("add_noise: SNR must be finite or +inf");
  const double signal = s.y.norm();
  if (signal == 0.0) throw DegenerateSignalError("add_noise: zero signal with finite SNR");
  CVector n = complex_gaussian(static_cast<int>(s.y.size()), seed);
  const double target = signal * std::pow(10.0, -snr_db / 20.0);
  n *= target / n.norm();
  Snapshot out = s;
  out.y = s.y + n;
  out.snr_db = snr_db;
  out.noise_norm = target;
  return out;
}

int k_max(int sensors) {
  if (sensors < 2) throw DomainError("k_max: need at least two sensors");
  return (sensors - 1) / 2;
}

double min_separation(const ArrayGeometry& geom) {
  return 1.0 / (geom.slots() * geom.spacing_over_lambda());
}

double wraparound_distance(double t1, double t2) {
  const double d = std::abs(t1 - t2);
  return std::min(d, 2.0 - d);
}

std::vector<double> degree_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw DomainError("degree_grid: invalid range");
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(n);
  for (long i = 0; i < n; ++i) grid.push_back(deg_to_t(start + step * static_cast<double>(i)));
  return grid;
}

}  // namespace gridfree
