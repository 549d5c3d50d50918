#include <algorithm>
#include <chrono>
#include <cmath>

#include "gridfree/classical.hpp"
#include "gridfree/discrete_cs.hpp"
#include "gridfree/errors.hpp"
#include "gridfree/harness.hpp"

namespace gridfree::harness {

namespace {

// Grid on which the dual polynomial is sampled for reports.
constexpr double kDualSampleStepDeg = 0.1;
// Stems below this fraction of the largest entry are not reported as support.
constexpr double kStemFraction = 1e-3;

std::uint64_t phase_seed(std::uint64_t seed, int snapshot) {
  return seed * 0x9E3779B97F4A7C15ull + 0xA5A5A5A5ull + static_cast<std::uint64_t>(snapshot);
}

// Indices of the k largest positive local maxima (endpoints included), ascending.
std::vector<std::size_t> top_peaks(const RVector& v, int k) {
  std::vector<std::size_t> peaks;
  const auto n = static_cast<std::size_t>(v.size());
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || v(i) >= v(i - 1);
    const bool right = i + 1 == n || v(i) > v(i + 1);
    if (left && right && v(i) > 0.0) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return v(a) > v(b); });
  if (static_cast<int>(peaks.size()) > k) peaks.resize(static_cast<std::size_t>(k));
  std::sort(peaks.begin(), peaks.end());
  return peaks;
}

void fill_from_peaks(MethodResult& r, const MethodSpec& spec) {
  if (!spec.sources) return;
  for (auto i : top_peaks(r.values, *spec.sources)) r.support.push_back(r.grid[i]);
}

double epsilon_for(const MethodSpec& spec, const Snapshot& y) {
  if (spec.epsilon_from_noise) return y.noise_norm;
  return *spec.epsilon;
}

void run_method(MethodResult& r, const MethodSpec& spec, const std::vector<Snapshot>& data,
                bool ingested) {
  const Snapshot& y = data.front();
  const auto& geom = y.geometry;
  if (spec.epsilon_from_noise && ingested) {
    throw ParseError("epsilon \"noise-norm\" is unavailable for ingested data", 0, "epsilon");
  }
  if (spec.grid_step_deg) r.grid = degree_grid(-90.0, 90.0, *spec.grid_step_deg);

  switch (spec.method) {
    case Method::cbf: {
      if (data.size() > 1) {
        const auto c = csm(data);
        r.values.resize(static_cast<Eigen::Index>(r.grid.size()));
        for (std::size_t i = 0; i < r.grid.size(); ++i) {
          const CVector a = steering_vector(geom, r.grid[i]);
          r.values(static_cast<Eigen::Index>(i)) = a.dot(c.matrix * a).real();
        }
      } else {
        r.values = cbf(y, r.grid).cwiseAbs2();
      }
      fill_from_peaks(r, spec);
      break;
    }
    case Method::l2: {
      r.values = min_l2(y, r.grid).cwiseAbs();
      fill_from_peaks(r, spec);
      break;
    }
    case Method::cs_grid: {
      const auto res = bpdn_solve({sensing_matrix(geom, r.grid), y.y, epsilon_for(spec, y)});
      if (!res.converged) throw Error("cs-grid: no certified convergence within the iteration limit");
      r.values = res.x.cwiseAbs();
      std::vector<std::size_t> idx;
      if (spec.sources) {
        idx = top_peaks(r.values, *spec.sources);
      } else {
        const double top = r.values.size() ? r.values.maxCoeff() : 0.0;
        for (Eigen::Index i = 0; i < r.values.size(); ++i)
          if (top > 0.0 && r.values(i) >= kStemFraction * top) idx.push_back(static_cast<std::size_t>(i));
      }
      r.amplitudes.resize(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) {
        r.support.push_back(r.grid[idx[k]]);
        r.amplitudes(static_cast<Eigen::Index>(k)) = res.x(static_cast<Eigen::Index>(idx[k]));
      }
      break;
    }
    case Method::gridfree: {
      auto est = grid_free_solve(y, epsilon_for(spec, y));
      r.support = est.support;
      r.amplitudes = est.amplitudes;
      r.grid = degree_grid(-90.0, 90.0, kDualSampleStepDeg);
      r.values = dual_poly_magnitude(est.dual, r.grid);
      r.estimate = std::move(est);
      break;
    }
    case Method::mvdr: {
      r.values = mvdr_spectrum(csm(data), r.grid).power;
      fill_from_peaks(r, spec);
      break;
    }
    case Method::music: {
      r.values = music_spectrum(eig_split(csm(data), *spec.sources), r.grid).power;
      fill_from_peaks(r, spec);
      break;
    }
    case Method::minnorm: {
      const auto v = minnorm_vector(eig_split(csm(data), *spec.sources), false);
      r.values = minnorm_spectrum(v, geom, r.grid).power;
      fill_from_peaks(r, spec);
      break;
    }
    case Method::root_mvdr:
      r.support = root_mvdr(csm(data), *spec.sources);
      break;
    case Method::root_music:
      r.support = root_music(eig_split(csm(data), *spec.sources));
      break;
    case Method::root_minnorm: {
      const auto v = minnorm_vector(eig_split(csm(data), *spec.sources), false);
      r.support = root_minnorm(v, geom, *spec.sources);
      break;
    }
  }
}

bool expectation_applies(const Expectation& e, Method m) {
  return e.methods.empty() || std::find(e.methods.begin(), e.methods.end(), m) != e.methods.end();
}

bool support_matches(const std::vector<double>& expected_deg, double tol_deg,
                     const std::vector<double>& support_t) {
  for (double deg : expected_deg) {
    const bool hit = std::any_of(support_t.begin(), support_t.end(),
                                 [&](double t) { return std::abs(t_to_deg(t) - deg) <= tol_deg; });
    if (!hit) return false;
  }
  return true;
}

}  // namespace

std::vector<Snapshot> simulate(const Scenario& s) {
  if (s.ingest) {
    auto data = ingest_snapshots(*s.ingest);
    if (data.empty()) throw ParseError("snapshot file holds no rows", 0, "ingest");
    return data;
  }
  const ArrayGeometry geom = s.geometry.build();
  std::vector<Snapshot> out;
  for (int l = 0; l < s.snapshots; ++l) {
    std::vector<Source> sources = s.sources;
    if (s.snapshots > 1 && !sources.empty()) {
      const CVector draw = complex_gaussian(static_cast<int>(sources.size()), phase_seed(s.seed, l));
      for (std::size_t k = 0; k < sources.size(); ++k) {
        const Complex u = draw(static_cast<Eigen::Index>(k));
        sources[k].amplitude = std::abs(sources[k].amplitude) * (u / std::abs(u));
      }
    }
    Snapshot y = synthesize(geom, SourceScene(sources));
    if (s.snr_db) {
      const bool zero = y.y.squaredNorm() == 0.0;
      if (!zero) y = add_noise(y, *s.snr_db, s.seed + static_cast<std::uint64_t>(l));
    }
    out.push_back(std::move(y));
  }
  return out;
}

Report run_scenario(const Scenario& s) {
  Report rep;
  rep.scenario = s;
  rep.data = simulate(s);
  rep.geometry = rep.data.front().geometry;
  for (const auto& spec : s.methods) {
    MethodResult r;
    r.method = spec.method;
    const auto start = std::chrono::steady_clock::now();
    try {
      run_method(r, spec, rep.data, s.ingest.has_value());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      r.ok = false;
      r.error = e.what();
      r.support.clear();
      r.amplitudes = CVector(0);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (s.expect && expectation_applies(*s.expect, r.method) && r.ok) {
      r.expectation_met = support_matches(s.expect->support_deg, s.expect->tol_deg, r.support);
    }
    rep.results.push_back(std::move(r));
  }
  return rep;
}

bool Report::any_failure() const {
  return std::any_of(results.begin(), results.end(), [](const MethodResult& r) { return !r.ok; });
}

bool Report::expectations_met() const {
  return std::all_of(results.begin(), results.end(),
                     [](const MethodResult& r) { return r.expectation_met.value_or(true); });
}

}  // namespace gridfree::harness
