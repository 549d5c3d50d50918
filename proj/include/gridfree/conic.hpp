#pragma once

// Small dense conic optimizer.
//
// Standard form handled by `solve`:
//
//   minimize / maximize   sum_k <C_k, X_k> + c_f' x_f
//   subject to            sum_k <A_ik, X_k> + F_i' x_f = b_i,   i = 1..m
//                         X_k symmetric positive semidefinite
//
// Coefficients over a symmetric block use a packed convention: an entry
// (row, col, w) with row <= col contributes w * X(row, col) to the functional.
// Off-diagonal entries are therefore counted once even though the matrix is
// symmetric. A 1x1 block is an ordinary nonnegative scalar.
//
// Complex Hermitian constraints are handled by `HermitianEmbedding`, which
// writes linear functionals of H = A + iB in terms of a real symmetric block
// of twice the size. The embedding uses the averaged map
//   A = (X11 + X22) / 2,   B = (X21 - X12) / 2,
// so any PSD real block yields a PSD Hermitian matrix and no structural
// equalities are required.

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "gridfree/core_model.hpp"

namespace gridfree::conic {

struct BlockEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double weight = 0.0;
};

struct LinearFunctional {
  std::vector<BlockEntry> psd;
  std::vector<std::pair<int, double>> free;  // (free variable index, weight)

  void add(int block, int row, int col, double weight);
  void add_free(int index, double weight) { free.emplace_back(index, weight); }
  bool empty() const { return psd.empty() && free.empty(); }
};

struct Equality {
  LinearFunctional lhs;
  double rhs = 0.0;
};

struct ConicProblem {
  std::vector<int> psd_blocks;  // block dimensions
  int free_vars = 0;
  LinearFunctional objective;
  std::vector<Equality> equalities;
  bool maximize = false;

  // Throws DomainError when a block dimension or an index is out of range.
  void validate() const;
  int add_block(int dim);
};

struct SolverOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 200;
};

enum class SolveStatus { optimal, max_iter, infeasible };

const char* to_string(SolveStatus status);

struct ConicSolution {
  std::vector<Eigen::MatrixXd> blocks;  // primal X_k
  Eigen::VectorXd free;                 // primal x_f
  Eigen::VectorXd multipliers;          // equality multipliers y
  std::vector<Eigen::MatrixXd> slacks;  // dual slack Z_k
  double objective_value = 0.0;         // primal objective (problem sense)
  double dual_objective = 0.0;          // b'y (problem sense)
  double duality_gap = 0.0;             // relative gap
  double primal_infeasibility = 0.0;    // ||b - A(x)|| / (1 + ||b||)
  double dual_infeasibility = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
};

ConicSolution solve(const ConicProblem& problem, const SolverOptions& opts = {});

// Value of a functional at a primal point.
double evaluate(const LinearFunctional& f, const std::vector<Eigen::MatrixXd>& blocks,
                const Eigen::VectorXd& free);

// Plain-text dump: a header line, block sizes, the objective and one line per
// equality with its packed coefficients.
void write_problem(std::ostream& out, const ConicProblem& problem);

// Packed-coefficient entries of the real or imaginary part of H(i, j) for a
// Hermitian matrix of dimension n stored in a real symmetric block of
// dimension 2n.
class HermitianEmbedding {
 public:
  struct Entry {
    int row = 0;
    int col = 0;
    double weight = 0.0;
  };

  explicit HermitianEmbedding(int n);

  int dim() const { return n_; }
  int real_dim() const { return 2 * n_; }

  std::vector<Entry> real_part(int i, int j) const;
  std::vector<Entry> imag_part(int i, int j) const;

  // Appends coeff * Re H(i,j) (or Im) for the given block to f.
  void add_real(LinearFunctional& f, int block, int i, int j, double coeff) const;
  void add_imag(LinearFunctional& f, int block, int i, int j, double coeff) const;

  // [[A, -B], [B, A]]
  Eigen::MatrixXd embed(const CMatrix& h) const;
  // Averaged Hermitian matrix represented by a real symmetric block.
  CMatrix extract(const Eigen::MatrixXd& x) const;

 private:
  int n_;
};

HermitianEmbedding realify_hermitian(int n);

// Norm bound ||c||_2 <= tau for c in C^n, posed as a Hermitian PSD block
// [[P, c], [c^H, tau]] of dimension n + 1 together with tr(P) = tau.
// The Schur complement gives P >= c c^H / tau, so tr(P) = tau forces
// ||c||^2 <= tau^2; conversely P = c c^H / tau + (tau - ||c||^2/tau) I / n is
// feasible whenever ||c|| <= tau. The classical arrow block uses P = tau I;
// the trace form reaches the same (c, tau) set with O(n) equalities.
class SocBlock {
 public:
  explicit SocBlock(int n) : n_(n), embedding_(n + 1) {}

  int dim() const { return n_; }
  const HermitianEmbedding& embedding() const { return embedding_; }
  int vector_index() const { return n_; }  // column holding c

  // Adds the block to `problem` together with the trace coupling; returns the
  // block index.
  int append_to(ConicProblem& problem) const;

  void add_vector_real(LinearFunctional& f, int block, int i, double coeff) const;
  void add_vector_imag(LinearFunctional& f, int block, int i, double coeff) const;
  void add_bound(LinearFunctional& f, int block, double coeff) const;

  // Arrow matrix [[tau I, c], [c^H, tau]]; PSD iff ||c|| <= tau.
  static CMatrix arrow_matrix(const CVector& c, double tau);

 private:
  int n_;
  HermitianEmbedding embedding_;
};

SocBlock soc_as_psd(int n);

}  // namespace gridfree::conic
