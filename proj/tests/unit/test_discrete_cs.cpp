#include <algorithm>
#include <random>

#include <doctest.h>

#include "gridfree/discrete_cs.hpp"
#include "gridfree/errors.hpp"

using namespace gridfree;

namespace {

// Smallest l1 norm over exact fits supported on at most `k` columns.
double exhaustive_l1(const CMatrix& a, const CVector& y, int k) {
  const int n = static_cast<int>(a.cols());
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<int>& cols) {
    CMatrix sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = a.col(cols[i]);
    const CVector x = sub.colPivHouseholderQr().solve(y);
    if ((y - sub * x).norm() <= 1e-9 * (1 + y.norm())) best = std::min(best, x.cwiseAbs().sum());
  };
  for (int i = 0; i < n; ++i) consider({i});
  if (k >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) consider({i, j});
  return best;
}

BpdnProblem mismatch_problem(double second_deg, double step, std::uint64_t seed) {
  const auto g = ArrayGeometry::ula(8, 0.5);
  const auto clean = synthesize(g, SourceScene({{deg_to_t(0.0), 1.0}, {deg_to_t(second_deg), 1.0}}));
  const auto y = add_noise(clean, 20.0, seed);
  return {sensing_matrix(g, degree_grid(-90, 90, step)), y.y, y.noise_norm};
}

std::vector<double> bins_above(const BpdnResult& r, const std::vector<double>& grid, double fraction) {
  const double top = r.x.cwiseAbs().maxCoeff();
  std::vector<double> out;
  for (Eigen::Index i = 0; i < r.x.size(); ++i)
    if (std::abs(r.x(i)) >= fraction * top) out.push_back(t_to_deg(grid[static_cast<std::size_t>(i)]));
  return out;
}

}  // namespace

TEST_CASE("on-grid sources give two dominant bins") {
  const auto p = mismatch_problem(15.0, 5.0, 1);
  const auto r = bpdn_solve(p);
  REQUIRE(r.converged);
  CHECK(r.residual_norm <= p.epsilon * (1 + 1e-6));
  const auto bins = bins_above(r, degree_grid(-90, 90, 5.0), 0.1);
  REQUIRE(bins.size() == 2);
  CHECK(std::abs(bins[0]) < 1e-9);
  CHECK(std::abs(bins[1] - 15.0) < 1e-9);
}

TEST_CASE("off-grid source spreads across neighbouring bins") {
  const auto p = mismatch_problem(17.0, 5.0, 1);
  const auto r = bpdn_solve(p);
  REQUIRE(r.converged);
  const auto bins = bins_above(r, degree_grid(-90, 90, 5.0), 0.1);
  const auto near = std::count_if(bins.begin(), bins.end(), [](double d) { return d >= 10.0 && d <= 25.0; });
  CHECK(near >= 2);
}

TEST_CASE("square DFT system is solved exactly") {
  const int m = 8;
  const auto g = ArrayGeometry::ula(m, 0.5);
  std::vector<double> grid;
  for (int k = 0; k < m; ++k) grid.push_back(-1.0 + 2.0 * k / m);
  const CMatrix a = sensing_matrix(g, grid);
  CVector x0 = CVector::Zero(m);
  x0(2) = Complex(1.0, 0.5);
  x0(5) = -0.7;
  const CVector y = a * x0;
  const auto r = bpdn_solve({a, y, 0.0});
  REQUIRE(r.converged);
  CHECK((r.x - a.adjoint() * y / static_cast<double>(m)).norm() < 1e-5);
  CHECK(r.residual_norm < 1e-8);
}

TEST_CASE("agreement with exhaustive sparse search") {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> gd;
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 6 + trial % 3, n = 10 + trial % 3, k = 1 + trial % 2;
    CMatrix a(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = {gd(rng), gd(rng)};
    a.colwise().normalize();
    CVector x0 = CVector::Zero(n);
    for (int i = 0; i < k; ++i) x0((trial * 3 + i * 5) % n) = {gd(rng), gd(rng)};
    const CVector y = a * x0;
    const auto r = bpdn_solve({a, y, 0.0});
    REQUIRE(r.converged);
    CHECK(std::abs(r.l1_norm - exhaustive_l1(a, y, k)) < 1e-5);
  }
}

TEST_CASE("larger epsilon never increases the optimum") {
  const auto p = mismatch_problem(17.0, 1.0, 3);
  double previous = std::numeric_limits<double>::infinity();
  for (double scale : {0.5, 1.0, 2.0, 4.0}) {
    const auto r = bpdn_solve({p.a, p.y, scale * p.epsilon});
    REQUIRE(r.converged);
    CHECK(r.residual_norm <= scale * p.epsilon * (1 + 1e-6));
    CHECK(r.l1_norm <= previous + 1e-6 * (1 + previous));
    previous = r.l1_norm;
  }
}

TEST_CASE("certified lower bound") {
  const auto p = mismatch_problem(15.0, 5.0, 2);
  const auto r = bpdn_solve(p);
  CHECK(r.lower_bound <= r.l1_norm + 1e-12);
  CHECK(r.l1_norm - r.lower_bound <= 1e-6 * (1 + r.l1_norm));
  CHECK(bpdn_dual_bound(p, CVector::Zero(p.y.size())) == 0.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gd;
  for (int i = 0; i < 20; ++i) {
    CVector c(p.y.size());
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = {gd(rng), gd(rng)};
    const double b = bpdn_dual_bound(p, c);
    CHECK(b >= 0.0);
    CHECK(b <= r.l1_norm + 1e-9);
  }
}

TEST_CASE("inconsistent equality system is infeasible") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gd;
  CMatrix a(6, 3);
  CVector y(6);
  for (int i = 0; i < 6; ++i) {
    y(i) = {gd(rng), gd(rng)};
    for (int j = 0; j < 3; ++j) a(i, j) = {gd(rng), gd(rng)};
  }
  CHECK_THROWS_AS(bpdn_solve({a, y, 0.0}), InfeasibleError);
  CHECK_THROWS_AS(bpdn_solve({a, y, 1e-3}), InfeasibleError);
  CHECK_NOTHROW(bpdn_solve({a, y, 2.0 * y.norm()}));
}

TEST_CASE("zero data") {
  const auto g = ArrayGeometry::ula(8, 0.5);
  const auto r = bpdn_solve({sensing_matrix(g, degree_grid(-90, 90, 5.0)), CVector::Zero(8), 0.0});
  CHECK(r.converged);
  CHECK(r.x.norm() == 0.0);
}

TEST_CASE("noisy fine-grid instances certify convergence") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = mismatch_problem(17.0, 1.0, seed);
    const auto r = bpdn_solve(p);
    CHECK_MESSAGE(r.converged, "seed " << seed);
    CHECK(r.l1_norm - r.lower_bound <= 1e-6 * (1 + r.l1_norm));
  }
}
