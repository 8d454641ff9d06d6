#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace nitsche {

/// Compressed sparse row storage: sorted, unique column indices per row.
using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using DenseMatrix = Eigen::MatrixXd;

class SolverError : public std::runtime_error {
 public:
  enum class Kind { singular, too_large, inaccurate, not_positive_definite, breakdown };
  SolverError(Kind kind, const std::string& what, long index = -1)
      : std::runtime_error(what), kind_(kind), index_(index) {}
  Kind kind() const { return kind_; }
  /// Offending pivot/column when known, -1 otherwise.
  long index() const { return index_; }

 private:
  Kind kind_;
  long index_;
};

/// Offsets monotone, column indices in range, strictly increasing per row.
bool is_valid_csr(const CsrMatrix& a);

struct DirectOptions {
  long max_dimension = 200000;
  double tolerance = 1e-10;  // on ||Ax-b||_inf / (||A||_inf ||x||_inf + ||b||_inf)
};

/// Sparse LU with partial pivoting and a fill-reducing column ordering,
/// followed by iterative refinement until the scaled residual meets
/// `tolerance`.
Eigen::VectorXd solve_direct(const CsrMatrix& a, const Eigen::VectorXd& b, const DirectOptions& opts = {});

double scaled_residual(const CsrMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

/// Incomplete LU factorization restricted to the sparsity pattern of A.
class Ilu0 {
 public:
  explicit Ilu0(const CsrMatrix& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& r) const;

 private:
  CsrMatrix lu_;
  Eigen::VectorXi diag_;
};

struct IterativeReport {
  enum class Status { converged, breakdown, stagnation, max_iterations };
  Status status = Status::converged;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged() const { return status == Status::converged; }
};

struct IterativeResult {
  Eigen::VectorXd x;
  IterativeReport report;
};

/// ILU(0)-preconditioned BiCGSTAB. Never throws on non-convergence; the
/// report distinguishes breakdown (rho or omega vanishing) from stagnation.
IterativeResult solve_bicgstab(const CsrMatrix& a, const Eigen::VectorXd& b, double tol = 1e-10,
                               int max_iterations = 5000);

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
};

/// Smallest eigenpair of S x = lambda M x, S symmetric positive
/// semi-definite, M symmetric positive definite.
EigenPair smallest_generalized_eig(const DenseMatrix& s, const DenseMatrix& m);

void write_matrix_market(const CsrMatrix& a, std::ostream& os);
void write_matrix_market(const DenseMatrix& a, std::ostream& os);
CsrMatrix read_matrix_market_sparse(std::istream& is);
DenseMatrix read_matrix_market_dense(std::istream& is);

}  // namespace nitsche
