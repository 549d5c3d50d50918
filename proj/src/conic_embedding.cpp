#include <iomanip>
#include <ostream>

#include "gridfree/conic.hpp"
#include "gridfree/errors.hpp"

namespace gridfree::conic {

HermitianEmbedding::HermitianEmbedding(int n) : n_(n) {
  if (n < 1) throw DomainError("HermitianEmbedding: dimension must be >= 1");
}

std::vector<HermitianEmbedding::Entry> HermitianEmbedding::real_part(int i, int j) const {
  const int a = std::min(i, j);
  const int b = std::max(i, j);
  return {{a, b, 0.5}, {n_ + a, n_ + b, 0.5}};
}

std::vector<HermitianEmbedding::Entry> HermitianEmbedding::imag_part(int i, int j) const {
  if (i == j) return {};
  if (i > j) {
    auto e = imag_part(j, i);
    for (auto& entry : e) entry.weight = -entry.weight;
    return e;
  }
  // Im H(i,j) = (X(n+i, j) - X(i, n+j)) / 2 with i < j.
  return {{j, n_ + i, 0.5}, {i, n_ + j, -0.5}};
}

void HermitianEmbedding::add_real(LinearFunctional& f, int block, int i, int j,
                                  double coeff) const {
  for (const auto& e : real_part(i, j)) f.add(block, e.row, e.col, coeff * e.weight);
}

void HermitianEmbedding::add_imag(LinearFunctional& f, int block, int i, int j,
                                  double coeff) const {
  for (const auto& e : imag_part(i, j)) f.add(block, e.row, e.col, coeff * e.weight);
}

Eigen::MatrixXd HermitianEmbedding::embed(const CMatrix& h) const {
  if (h.rows() != n_ || h.cols() != n_) throw DomainError("embed: dimension mismatch");
  Eigen::MatrixXd x(2 * n_, 2 * n_);
  const Eigen::MatrixXd a = h.real();
  const Eigen::MatrixXd b = h.imag();
  x << a, -b, b, a;
  return x;
}

CMatrix HermitianEmbedding::extract(const Eigen::MatrixXd& x) const {
  if (x.rows() != 2 * n_ || x.cols() != 2 * n_) throw DomainError("extract: dimension mismatch");
  const Eigen::MatrixXd a = 0.5 * (x.topLeftCorner(n_, n_) + x.bottomRightCorner(n_, n_));
  const Eigen::MatrixXd b = 0.5 * (x.bottomLeftCorner(n_, n_) - x.topRightCorner(n_, n_));
  CMatrix h(n_, n_);
  h.real() = a;
  h.imag() = b;
  return h;
}

HermitianEmbedding realify_hermitian(int n) { return HermitianEmbedding(n); }

int SocBlock::append_to(ConicProblem& problem) const {
  const int block = problem.add_block(embedding_.real_dim());
  Equality trace;
  for (int i = 0; i < n_; ++i) embedding_.add_real(trace.lhs, block, i, i, 1.0);
  embedding_.add_real(trace.lhs, block, n_, n_, -1.0);
  trace.rhs = 0.0;
  problem.equalities.push_back(std::move(trace));
  return block;
}

void SocBlock::add_vector_real(LinearFunctional& f, int block, int i, double coeff) const {
  embedding_.add_real(f, block, i, n_, coeff);
}

void SocBlock::add_vector_imag(LinearFunctional& f, int block, int i, double coeff) const {
  embedding_.add_imag(f, block, i, n_, coeff);
}

void SocBlock::add_bound(LinearFunctional& f, int block, double coeff) const {
  embedding_.add_real(f, block, n_, n_, coeff);
}

CMatrix SocBlock::arrow_matrix(const CVector& c, double tau) {
  const auto n = c.size();
  CMatrix m = CMatrix::Zero(n + 1, n + 1);
  m.topLeftCorner(n, n) = tau * CMatrix::Identity(n, n);
  m.topRightCorner(n, 1) = c;
  m.bottomLeftCorner(1, n) = c.adjoint();
  m(n, n) = tau;
  return m;
}

SocBlock soc_as_psd(int n) {
  if (n < 1) throw DomainError("soc_as_psd: dimension must be >= 1");
  return SocBlock(n);
}

void write_problem(std::ostream& out, const ConicProblem& problem) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  auto write_functional = [&](const LinearFunctional& f) {
    for (const auto& e : f.psd)
      out << "  psd " << e.block << ' ' << e.row << ' ' << e.col << ' ' << e.weight << '\n';
    for (const auto& [k, w] : f.free) out << "  free " << k << ' ' << w << '\n';
  };
  out << "conic-problem 1\n";
  out << "sense " << (problem.maximize ? "maximize" : "minimize") << '\n';
  out << "blocks " << problem.psd_blocks.size();
  for (int d : problem.psd_blocks) out << ' ' << d;
  out << '\n';
  out << "free " << problem.free_vars << '\n';
  out << "objective " << problem.objective.psd.size() + problem.objective.free.size() << '\n';
  write_functional(problem.objective);
  out << "equalities " << problem.equalities.size() << '\n';
  for (std::size_t i = 0; i < problem.equalities.size(); ++i) {
    const auto& eq = problem.equalities[i];
    out << "equality " << i << " rhs " << eq.rhs << ' '
        << eq.lhs.psd.size() + eq.lhs.free.size() << '\n';
    write_functional(eq.lhs);
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace gridfree::conic
