#include <random>
#include <sstream>

#include <doctest.h>

#include "gridfree/atomic_dual.hpp"
#include "gridfree/conic.hpp"
#include "gridfree/errors.hpp"

using namespace gridfree;
using namespace gridfree::conic;

namespace {

CMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  return (a + a.adjoint()) / 2.0;
}

double min_eig(const Eigen::MatrixXd& m) { return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues()(0); }

void check_certificate(const ConicProblem& p, const ConicSolution& s, const SolverOptions& o) {
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.duality_gap <= o.gap_tol);
  for (const auto& x : s.blocks) CHECK(min_eig(x) >= -o.feas_tol);
  double rhs_norm = 0.0, res = 0.0;
  for (const auto& e : p.equalities) {
    rhs_norm += e.rhs * e.rhs;
    const double r = evaluate(e.lhs, s.blocks, s.free) - e.rhs;
    res += r * r;
  }
  CHECK(std::sqrt(res) <= o.feas_tol * (1.0 + std::sqrt(rhs_norm)));
  // Reported objective agrees with a recomputation from the primal point.
  CHECK(std::abs(evaluate(p.objective, s.blocks, s.free) - s.objective_value) <=
        1e-9 * (1.0 + std::abs(s.objective_value)));
}

}  // namespace

TEST_CASE("2x2 determinant condition") {
  ConicProblem p;
  p.maximize = true;
  const int b = p.add_block(2);
  p.objective.add(b, 0, 1, 1.0);
  Equality e0, e1;
  e0.lhs.add(b, 0, 0, 1.0);
  e0.rhs = 1.0;
  e1.lhs.add(b, 1, 1, 1.0);
  e1.rhs = 1.0;
  p.equalities = {e0, e1};
  const SolverOptions o;
  const auto s = solve(p, o);
  check_certificate(p, s, o);
  CHECK(std::abs(s.objective_value - 1.0) < 1e-7);
}

TEST_CASE("scalar block with an equality") {
  ConicProblem p;
  p.maximize = true;
  const int b = p.add_block(1);
  p.objective.add(b, 0, 0, 2.0);
  Equality e;
  e.lhs.add(b, 0, 0, 1.0);
  e.rhs = 3.0;
  p.equalities = {e};
  const SolverOptions o;
  const auto s = solve(p, o);
  check_certificate(p, s, o);
  CHECK(std::abs(s.objective_value - 6.0) < 1e-6);
}

TEST_CASE("free variables") {
  // minimize x_f subject to x_f - X = 2 with X >= 0: optimum 2.
  ConicProblem p;
  const int b = p.add_block(1);
  p.free_vars = 1;
  p.objective.add_free(0, 1.0);
  Equality e;
  e.lhs.add_free(0, 1.0);
  e.lhs.add(b, 0, 0, -1.0);
  e.rhs = 2.0;
  p.equalities = {e};
  const auto s = solve(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(std::abs(s.objective_value - 2.0) < 1e-6);
}

TEST_CASE("infeasible problem is reported, not solved") {
  ConicProblem p;
  const int b = p.add_block(1);
  p.objective.add(b, 0, 0, 1.0);
  Equality e;
  e.lhs.add(b, 0, 0, 1.0);
  e.rhs = -1.0;
  p.equalities = {e};
  const auto s = solve(p);
  CHECK(s.status != SolveStatus::optimal);
}

TEST_CASE("validate rejects malformed problems") {
  ConicProblem p;
  p.add_block(2);
  Equality e;
  e.lhs.add(3, 0, 0, 1.0);
  p.equalities = {e};
  CHECK_THROWS_AS(p.validate(), DomainError);
  ConicProblem q;
  q.psd_blocks = {0};
  CHECK_THROWS_AS(q.validate(), DomainError);
}

TEST_CASE("Hermitian embedding") {
  const auto h1 = realify_hermitian(1);
  CMatrix one(1, 1);
  one(0, 0) = 2.5;
  const Eigen::MatrixXd e1 = h1.embed(one);
  CHECK(e1.rows() == 2);
  CHECK(e1(0, 0) == 2.5);
  CHECK(e1(1, 1) == 2.5);
  CHECK(e1(0, 1) == 0.0);

  CMatrix h(2, 2);
  h << Complex(1, 0), Complex(0, 1), Complex(0, -1), Complex(1, 0);
  const auto e = realify_hermitian(2).embed(h);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e).eigenvalues();
  CHECK(std::abs(ev(0)) < 1e-14);
  CHECK(std::abs(ev(1)) < 1e-14);
  CHECK(std::abs(ev(2) - 2.0) < 1e-14);
  CHECK(std::abs(ev(3) - 2.0) < 1e-14);
}

TEST_CASE("embedding doubles every eigenvalue") {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 10; ++n) {
    const CMatrix h = random_hermitian(n, rng);
    const auto emb = realify_hermitian(n);
    const Eigen::VectorXd he = Eigen::SelfAdjointEigenSolver<CMatrix>(h).eigenvalues();
    const Eigen::VectorXd re = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(emb.embed(h)).eigenvalues();
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(re(2 * i) - he(i)) < 1e-10);
      CHECK(std::abs(re(2 * i + 1) - he(i)) < 1e-10);
    }
    CHECK((emb.extract(emb.embed(h)) - h).norm() < 1e-13);
  }
}

TEST_CASE("embedding functionals read real and imaginary parts") {
  std::mt19937_64 rng(5);
  const int n = 4;
  const CMatrix h = random_hermitian(n, rng);
  const auto emb = realify_hermitian(n);
  const std::vector<Eigen::MatrixXd> blocks = {emb.embed(h)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      LinearFunctional re, im;
      emb.add_real(re, 0, i, j, 1.0);
      emb.add_imag(im, 0, i, j, 1.0);
      CHECK(std::abs(evaluate(re, blocks, {}) - h(i, j).real()) < 1e-13);
      CHECK(std::abs(evaluate(im, blocks, {}) - h(i, j).imag()) < 1e-13);
    }
}

TEST_CASE("arrow block is PSD exactly when the norm is bounded") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  CHECK(Eigen::SelfAdjointEigenSolver<CMatrix>(SocBlock::arrow_matrix(CVector::Zero(3), 0.0)).eigenvalues()(0) >= 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    CVector c(n);
    for (int i = 0; i < n; ++i) c(i) = {g(rng), g(rng)};
    const double tau = std::abs(g(rng)) * 3.0;
    const double lo = Eigen::SelfAdjointEigenSolver<CMatrix>(SocBlock::arrow_matrix(c, tau)).eigenvalues()(0);
    if (std::abs(c.norm() - tau) > 1e-9) CHECK((lo >= -1e-12) == (c.norm() <= tau));
  }
}

TEST_CASE("norm block gives the Euclidean norm") {
  auto minimal_tau = [](const CVector& c) {
    ConicProblem p;
    const auto soc = soc_as_psd(static_cast<int>(c.size()));
    const int b = soc.append_to(p);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      Equality re, im;
      soc.add_vector_real(re.lhs, b, static_cast<int>(i), 1.0);
      re.rhs = c(i).real();
      soc.add_vector_imag(im.lhs, b, static_cast<int>(i), 1.0);
      im.rhs = c(i).imag();
      p.equalities.push_back(re);
      p.equalities.push_back(im);
    }
    soc.add_bound(p.objective, b, 1.0);
    const auto s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);
    return s.objective_value;
  };
  CVector one(1);
  one(0) = 3.0;
  CHECK(std::abs(minimal_tau(one) - 3.0) < 1e-6);
  CVector two(2);
  two << Complex(3, 0), Complex(0, 4);
  CHECK(std::abs(minimal_tau(two) - 5.0) < 1e-6);
}

TEST_CASE("noiseless dual of the three-source scene meets strong duality") {
  const auto g = ArrayGeometry::ula(21, 0.5);
  std::vector<Source> s = {{deg_to_t(-7.2385), 1.0}, {deg_to_t(15.962), 0.01}, {deg_to_t(42.0671), 0.6}};
  const auto y = synthesize(g, SourceScene(s));
  const auto p = build_dual_sdp(y);
  const SolverOptions o{1e-10, 1e-10, 200};
  const auto sol = solve(p, o);
  check_certificate(p, sol, o);
  CHECK(std::abs(sol.objective_value - 1.61) < 1e-5);

  // Same problem twice: agreement within 10 gap_tol.
  const auto again = solve(p, o);
  CHECK(std::abs(again.objective_value - sol.objective_value) <= 10 * o.gap_tol * (1 + std::abs(sol.objective_value)));
}

TEST_CASE("problem dump") {
  ConicProblem p;
  p.maximize = true;
  const int b = p.add_block(2);
  p.objective.add(b, 0, 1, 1.0);
  Equality e;
  e.lhs.add(b, 0, 0, 1.0);
  e.rhs = 1.0;
  p.equalities = {e};
  std::ostringstream out;
  write_problem(out, p);
  CHECK(out.str() ==
        "conic-problem 1\nsense maximize\nblocks 1 2\nfree 0\nobjective 1\n  psd 0 0 1 1\n"
        "equalities 1\nequality 0 rhs 1 1\n  psd 0 0 0 1\n");
}
