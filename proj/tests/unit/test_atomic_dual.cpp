#include <algorithm>

#include <doctest.h>

#include "gridfree/atomic_dual.hpp"
#include "gridfree/classical.hpp"
#include "gridfree/errors.hpp"

using namespace gridfree;

namespace {

constexpr double kPiLocal = 3.14159265358979323846;

Snapshot three_sources() {
  return synthesize(ArrayGeometry::ula(21, 0.5),
                    SourceScene({{deg_to_t(-7.2385), 1.0}, {deg_to_t(15.962), 0.01}, {deg_to_t(42.0671), 0.6}}));
}

double max_dual_modulus(const DualVector& d) {
  double top = 0.0;
  for (int k = 0; k < 10000; ++k) top = std::max(top, std::abs(dual_poly_eval(d, -1.0 + 2.0 * k / 9999.0)));
  return top;
}

void check_alignment(const DoaEstimate& e) {
  for (std::size_t i = 0; i < e.support.size(); ++i) {
    const Complex x = e.amplitudes(static_cast<Eigen::Index>(i));
    if (std::abs(x) == 0.0) continue;
    CHECK(std::abs(dual_poly_eval(e.dual, e.support[i]) * std::conj(x / std::abs(x)) - 1.0) < 1e-3);
  }
}

}  // namespace

TEST_CASE("dual program structure") {
  const auto y2 = synthesize(ArrayGeometry::ula(2, 0.5), SourceScene(std::vector<Source>{{0.1, 1.0}}));
  const auto p2 = build_dual_sdp(y2);
  REQUIRE(p2.psd_blocks.size() == 1);
  CHECK(p2.psd_blocks[0] == 6);
  // Corner, trace sum, and real + imaginary parts of the j = 1 condition.
  CHECK(p2.equalities.size() == 4);
  CHECK(p2.maximize);

  const auto p21 = build_dual_sdp(three_sources());
  CHECK(p21.psd_blocks[0] == 44);
  CHECK(p21.equalities.size() == 2 + 2 * 20);

  const auto noisy = build_dual_sdp_noisy(three_sources(), 0.1);
  CHECK(noisy.psd_blocks.size() == 2);
  CHECK(noisy.psd_blocks[1] == 44);
  CHECK_THROWS_AS(build_dual_sdp_noisy(three_sources(), -1.0), DomainError);
}

TEST_CASE("zero epsilon reduces to the noiseless program") {
  const auto y = three_sources();
  const auto a = conic::solve(build_dual_sdp(y));
  const auto b = conic::solve(build_dual_sdp_noisy(y, 0.0));
  CHECK(std::abs(a.objective_value - b.objective_value) <= 10 * 1e-8 * (1 + std::abs(a.objective_value)));
}

TEST_CASE("epsilon at or above the data norm gives the zero certificate") {
  auto y = three_sources();
  y.y /= y.y.norm();
  const auto sol = conic::solve(build_dual_sdp_noisy(y, 1.5));
  REQUIRE(sol.status == conic::SolveStatus::optimal);
  CHECK(std::abs(sol.objective_value) < 1e-6);
  const auto d = extract_dual_vector(sol, y.geometry, 1.5);
  CHECK(d.c.norm() < 1e-5);

  const auto e = grid_free_solve(three_sources(), 10.0);
  CHECK(e.support.empty());
}

TEST_CASE("null constraints") {
  const auto y = three_sources();
  const auto p = build_dual_sdp(y);
  CHECK(apply_null_constraints(p, y.geometry).equalities.size() == p.equalities.size());

  const auto g5 = ArrayGeometry::random_subset(21, 13, 1, 0.5);
  const auto y5 = synthesize(g5, SourceScene(std::vector<Source>{{0.2, 1.0}}));
  const auto p5 = build_dual_sdp(y5);
  CHECK(apply_null_constraints(p5, g5).equalities.size() == p5.equalities.size() + 16);

  std::vector<bool> mask(8, true);
  mask[0] = false;
  const auto g0 = ArrayGeometry::masked(mask, 0.5);
  const auto y0 = synthesize(g0, SourceScene({{0.3, 1.0}, {-0.4, 0.5}}));
  const auto sol = conic::solve(apply_null_constraints(build_dual_sdp(y0), g0));
  REQUIRE(sol.status == conic::SolveStatus::optimal);
  const auto d = extract_dual_vector(sol, g0, 0.0);
  CHECK(std::abs(d.c(0)) <= 1e-8);
}

TEST_CASE("dual polynomial evaluation") {
  const auto g = ArrayGeometry::ula(4, 0.5);
  CVector e1 = CVector::Zero(4), e2 = CVector::Zero(4);
  e1(0) = 1.0;
  e2(1) = 1.0;
  for (double t = -1.0; t <= 1.0; t += 0.05) {
    CHECK(std::abs(dual_poly_eval({e1, g, 0.0}, t) - 1.0) < 1e-15);
    const Complex h = dual_poly_eval({e2, g, 0.0}, t);
    CHECK(std::abs(std::abs(h) - 1.0) < 1e-15);
    CHECK(std::abs(h - std::polar(1.0, -kPiLocal * t)) < 1e-14);
  }
}

TEST_CASE("noiseless three-source recovery") {
  const auto y = three_sources();
  const auto e = grid_free_solve(y, 0.0);
  CHECK_FALSE(e.unresolvable);
  REQUIRE(e.support.size() == 3);
  const double deg[] = {-7.2385, 15.962, 42.0671};
  const double amp[] = {1.0, 0.01, 0.6};
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(e.support[i] - deg_to_t(deg[i])) < 1e-4);
    CHECK(std::abs(e.amplitudes(i) - Complex(amp[i], 0.0)) < 1e-4);
    CHECK(std::abs(std::abs(dual_poly_eval(e.dual, deg_to_t(deg[i]))) - 1.0) < 1e-4);
  }
  CHECK(e.duality_gap_check <= 1e-5);
  CHECK(max_dual_modulus(e.dual) <= 1 + 1e-6);
  check_alignment(e);
}

TEST_CASE("ten positive sources at the limit") {
  const std::vector<double> t = {-0.85, -0.62, -0.55, -0.30, -0.12, 0.05, 0.22, 0.31, 0.58, 0.80};
  const std::vector<double> x = {0.8, 0.6, 0.9, 0.5, 1, 0.9, 0.1, 1, 0.4, 0.7};
  std::vector<Source> s;
  for (std::size_t i = 0; i < t.size(); ++i) s.push_back({t[i], x[i]});
  const auto e = grid_free_solve(synthesize(ArrayGeometry::ula(21, 0.5), SourceScene(s)), 0.0);
  CHECK_FALSE(e.unresolvable);
  REQUIRE(e.support.size() == 10);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(e.support[i] - t[i]) < 1e-3);
  CHECK(static_cast<int>(e.support.size()) <= k_max(21));

  s.push_back({deg_to_t(71.81), 0.1});
  const auto over = grid_free_solve(synthesize(ArrayGeometry::ula(21, 0.5), SourceScene(s)), 0.0);
  CHECK(over.unresolvable);
}

TEST_CASE("random array recovery annihilates masked coefficients") {
  const auto g = ArrayGeometry::random_subset(21, 13, 1, 0.5);
  const double deg[] = {-32.8881, 25.2773, 69.3903};
  const double amp[] = {0.67, 0.33, 1.0};
  std::vector<Source> s;
  for (int i = 0; i < 3; ++i) s.push_back({deg_to_t(deg[i]), amp[i]});
  const auto e = grid_free_solve(synthesize(g, SourceScene(s)), 0.0);
  REQUIRE(e.support.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(e.support[i] - deg_to_t(deg[i])) < 1e-4);
    CHECK(std::abs(e.amplitudes(i) - Complex(amp[i], 0.0)) < 1e-4);
  }
  for (int m : g.inactive_slots()) CHECK(std::abs(e.dual.c(m)) <= 1e-8);
  CHECK(e.duality_gap_check <= 1e-5);
  check_alignment(e);
}

TEST_CASE("noisy recovery at 20 dB") {
  const auto g = ArrayGeometry::ula(21, 0.5);
  const double deg[] = {-19.6942, 28.3594, 73.9457};
  const double amp[] = {0.6, 0.3, 0.3};
  std::vector<Source> s;
  for (int i = 0; i < 3; ++i) s.push_back({deg_to_t(deg[i]), amp[i]});
  const auto y = add_noise(synthesize(g, SourceScene(s)), 20.0, 1);
  const auto e = grid_free_solve(y, y.noise_norm);
  REQUIRE(e.support.size() >= 3);
  CHECK(max_dual_modulus(e.dual) <= 1 + 1e-6);
  std::vector<std::size_t> idx(e.support.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(e.amplitudes(static_cast<Eigen::Index>(a))) > std::abs(e.amplitudes(static_cast<Eigen::Index>(b)));
  });
  std::vector<double> strongest;
  for (int i = 0; i < 3; ++i) strongest.push_back(t_to_deg(e.support[idx[i]]));
  std::sort(strongest.begin(), strongest.end());
  for (int i = 0; i < 3; ++i) CHECK(std::abs(strongest[i] - deg[i]) < 0.5);
}

TEST_CASE("scaling equivariance") {
  const Complex alpha = std::polar(2.5, 0.7);
  const auto y = three_sources();
  Snapshot scaled = y;
  scaled.y *= alpha;
  const auto a = grid_free_solve(y, 0.0);
  const auto b = grid_free_solve(scaled, 0.0);
  REQUIRE(a.support.size() == b.support.size());
  for (std::size_t i = 0; i < a.support.size(); ++i) {
    CHECK(std::abs(a.support[i] - b.support[i]) < 1e-6);
    const Complex expect = alpha * a.amplitudes(static_cast<Eigen::Index>(i));
    CHECK(std::abs(b.amplitudes(static_cast<Eigen::Index>(i)) - expect) < 1e-6 * std::abs(expect) + 1e-9);
  }

  const auto g = ArrayGeometry::ula(12, 0.5);
  const auto noisy = add_noise(synthesize(g, SourceScene({{-0.5, 1.0}, {0.2, 0.7}})), 25.0, 3);
  Snapshot noisy_scaled = noisy;
  noisy_scaled.y *= alpha;
  const auto c = grid_free_solve(noisy, noisy.noise_norm);
  const auto d = grid_free_solve(noisy_scaled, std::abs(alpha) * noisy.noise_norm);
  REQUIRE(c.support.size() == d.support.size());
  for (std::size_t i = 0; i < c.support.size(); ++i) CHECK(std::abs(c.support[i] - d.support[i]) < 1e-6);
}

TEST_CASE("zero data yields an empty estimate") {
  const auto y = synthesize(ArrayGeometry::ula(8, 0.5), SourceScene());
  const auto e = grid_free_solve(y, 0.0);
  CHECK(e.support.empty());
  CHECK(e.amplitudes.size() == 0);
}

TEST_CASE("dual objective") {
  const auto y = three_sources();
  const auto e = grid_free_solve(y, 0.0);
  CHECK(std::abs(dual_objective(e.dual, y) - 1.61) < 1e-5);
  DualVector shifted = e.dual;
  shifted.epsilon = 0.1;
  CHECK(std::abs(dual_objective(shifted, y) - (dual_objective(e.dual, y) - 0.1 * e.dual.c.norm())) < 1e-12);
}
