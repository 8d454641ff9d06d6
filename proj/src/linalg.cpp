#include "nitsche/linalg.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace nitsche {

bool is_valid_csr(const CsrMatrix& a) {
  if (!a.isCompressed()) return false;
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  if (outer[0] != 0) return false;
  for (int r = 0; r < a.rows(); ++r) {
    if (outer[r + 1] < outer[r]) return false;
    for (int p = outer[r]; p < outer[r + 1]; ++p) {
      if (inner[p] < 0 || inner[p] >= a.cols()) return false;
      if (p > outer[r] && inner[p] <= inner[p - 1]) return false;
    }
  }
  return outer[a.rows()] == a.nonZeros();
}

namespace {

double inf_norm(const CsrMatrix& a) {
  double best = 0.0;
  for (int r = 0; r < a.outerSize(); ++r) {
    double row = 0.0;
    for (CsrMatrix::InnerIterator it(a, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

long trailing_integer(const std::string& s) {
  auto end = s.find_last_of("0123456789");
  if (end == std::string::npos) return -1;
  auto begin = s.find_last_not_of("0123456789", end);
  begin = begin == std::string::npos ? 0 : begin + 1;
  return std::stol(s.substr(begin, end - begin + 1));
}

}  // namespace

double scaled_residual(const CsrMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const Eigen::VectorXd r = a * x - b;
  const double denom = inf_norm(a) * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  return denom > 0.0 ? r.lpNorm<Eigen::Infinity>() / denom : r.lpNorm<Eigen::Infinity>();
}

Eigen::VectorXd solve_direct(const CsrMatrix& a, const Eigen::VectorXd& b, const DirectOptions& opts) {
  if (a.rows() != a.cols()) throw std::invalid_argument("solve_direct: matrix not square");
  if (a.rows() != b.size()) throw std::invalid_argument("solve_direct: dimension mismatch");
  if (a.rows() > opts.max_dimension)
    throw SolverError(SolverError::Kind::too_large,
                      "solve_direct: dimension " + std::to_string(a.rows()) + " exceeds cap " +
                          std::to_string(opts.max_dimension));
  if (b.isZero(0.0)) return Eigen::VectorXd::Zero(b.size());

  Eigen::SparseMatrix<double, Eigen::ColMajor, int> col = a;
  col.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(col);
  lu.factorize(col);
  if (lu.info() != Eigen::Success) {
    const std::string msg = lu.lastErrorMessage();
    throw SolverError(SolverError::Kind::singular, "solve_direct: singular matrix (" + msg + ")", trailing_integer(msg));
  }
  Eigen::VectorXd x = lu.solve(b);
  double res = scaled_residual(a, x, b);
  for (int step = 0; step < 3 && res > opts.tolerance; ++step) {
    x += lu.solve(b - a * x);
    res = scaled_residual(a, x, b);
  }
  if (!std::isfinite(res) || res > opts.tolerance) {
    std::ostringstream os;
    os << "solve_direct: scaled residual " << res << " above tolerance " << opts.tolerance;
    throw SolverError(SolverError::Kind::inaccurate, os.str());
  }
  return x;
}

Ilu0::Ilu0(const CsrMatrix& a) : lu_(a), diag_(a.rows()) {
  lu_.makeCompressed();
  const int n = static_cast<int>(lu_.rows());
  const int* outer = lu_.outerIndexPtr();
  const int* inner = lu_.innerIndexPtr();
  double* val = lu_.valuePtr();
  for (int r = 0; r < n; ++r) {
    diag_(r) = -1;
    for (int p = outer[r]; p < outer[r + 1]; ++p)
      if (inner[p] == r) diag_(r) = p;
    if (diag_(r) < 0) throw SolverError(SolverError::Kind::breakdown, "Ilu0: missing diagonal entry", r);
  }
  std::vector<int> position(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int p = outer[i]; p < outer[i + 1]; ++p) position[inner[p]] = p;
    for (int p = outer[i]; p < outer[i + 1]; ++p) {
      const int k = inner[p];
      if (k >= i) break;
      const double pivot = val[diag_(k)];
      if (pivot == 0.0) throw SolverError(SolverError::Kind::breakdown, "Ilu0: zero pivot", k);
      val[p] /= pivot;
      for (int q = diag_(k) + 1; q < outer[k + 1]; ++q) {
        const int j = inner[q];
        if (position[j] >= 0) val[position[j]] -= val[p] * val[q];
      }
    }
    for (int p = outer[i]; p < outer[i + 1]; ++p) position[inner[p]] = -1;
    if (val[diag_(i)] == 0.0) throw SolverError(SolverError::Kind::breakdown, "Ilu0: zero pivot", i);
  }
}

Eigen::VectorXd Ilu0::solve(const Eigen::VectorXd& r) const {
  const int n = static_cast<int>(lu_.rows());
  const int* outer = lu_.outerIndexPtr();
  const int* inner = lu_.innerIndexPtr();
  const double* val = lu_.valuePtr();
  Eigen::VectorXd y = r;
  for (int i = 0; i < n; ++i)
    for (int p = outer[i]; p < diag_(i); ++p) y(i) -= val[p] * y(inner[p]);
  for (int i = n - 1; i >= 0; --i) {
    for (int p = diag_(i) + 1; p < outer[i + 1]; ++p) y(i) -= val[p] * y(inner[p]);
    y(i) /= val[diag_(i)];
  }
  return y;
}

IterativeResult solve_bicgstab(const CsrMatrix& a, const Eigen::VectorXd& b, double tol, int max_iterations) {
  using Status = IterativeReport::Status;
  if (a.rows() != a.cols()) throw std::invalid_argument("solve_bicgstab: matrix not square");
  IterativeResult out;
  out.x = Eigen::VectorXd::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) return out;

  constexpr int kStagnationWindow = 200;
  constexpr double kTiny = 1e-300;
  const Ilu0 precond(a);
  Eigen::VectorXd r = b;
  const Eigen::VectorXd r_hat = r;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(b.size());
  double rho_old = 1.0, alpha = 1.0, omega = 1.0;
  double best = 1.0;
  int since_best = 0;
  auto& rep = out.report;
  rep.relative_residual = 1.0;

  for (int it = 1; it <= max_iterations; ++it) {
    rep.iterations = it;
    const double rho = r_hat.dot(r);
    if (std::abs(rho) <= kTiny || std::abs(rho) < 1e-30 * r_hat.norm() * r.norm()) {
      rep.status = Status::breakdown;
      return out;
    }
    const double beta = (rho / rho_old) * (alpha / omega);
    p = r + beta * (p - omega * v);
    const Eigen::VectorXd y = precond.solve(p);
    v = a * y;
    const double denom = r_hat.dot(v);
    if (std::abs(denom) <= kTiny) {
      rep.status = Status::breakdown;
      return out;
    }
    alpha = rho / denom;
    const Eigen::VectorXd s = r - alpha * v;
    if (s.norm() / bnorm <= tol) {
      out.x += alpha * y;
      rep.relative_residual = (b - a * out.x).norm() / bnorm;
      rep.status = Status::converged;
      return out;
    }
    const Eigen::VectorXd z = precond.solve(s);
    const Eigen::VectorXd t = a * z;
    const double tt = t.squaredNorm();
    omega = tt > 0.0 ? t.dot(s) / tt : 0.0;
    if (omega == 0.0) {
      rep.status = Status::breakdown;
      return out;
    }
    out.x += alpha * y + omega * z;
    r = s - omega * t;
    rho_old = rho;
    rep.relative_residual = r.norm() / bnorm;
    if (rep.relative_residual <= tol) {
      rep.relative_residual = (b - a * out.x).norm() / bnorm;
      if (rep.relative_residual <= tol) {
        rep.status = Status::converged;
        return out;
      }
      r = b - a * out.x;  // drifted recurrence: continue from the true residual
    }
    if (rep.relative_residual < 0.5 * best) {
      best = rep.relative_residual;
      since_best = 0;
    } else if (++since_best > kStagnationWindow) {
      rep.status = Status::stagnation;
      return out;
    }
  }
  rep.status = Status::max_iterations;
  return out;
}

EigenPair smallest_generalized_eig(const DenseMatrix& s, const DenseMatrix& m) {
  if (s.rows() != s.cols() || m.rows() != m.cols() || s.rows() != m.rows())
    throw std::invalid_argument("smallest_generalized_eig: dimension mismatch");
  Eigen::LLT<DenseMatrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw SolverError(SolverError::Kind::not_positive_definite, "smallest_generalized_eig: M is not positive definite");
  // L^{-1} S L^{-T}
  DenseMatrix c = llt.matrixL().solve(s);
  c = llt.matrixL().solve(c.transpose()).transpose();
  c = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(c);
  if (es.info() != Eigen::Success)
    throw SolverError(SolverError::Kind::inaccurate, "smallest_generalized_eig: eigensolver did not converge");
  EigenPair out;
  out.value = es.eigenvalues()(0);
  out.vector = llt.matrixU().solve(es.eigenvectors().col(0));
  return out;
}

void write_matrix_market(const CsrMatrix& a, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int r = 0; r < a.outerSize(); ++r)
    for (CsrMatrix::InnerIterator it(a, r); it; ++it) os << r + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_matrix_market(const DenseMatrix& a, std::ostream& os) {
  os << "%%MatrixMarket matrix array real general\n";
  os << a.rows() << ' ' << a.cols() << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r) os << a(r, c) << '\n';
}

namespace {

struct MarketHeader {
  bool coordinate = true;
  bool symmetric = false;
};

MarketHeader read_banner(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error("MatrixMarket: missing banner");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || field != "real") throw std::runtime_error("MatrixMarket: only real matrices supported");
  MarketHeader h;
  h.coordinate = format == "coordinate";
  h.symmetric = symmetry == "symmetric";
  if (!h.coordinate && format != "array") throw std::runtime_error("MatrixMarket: unknown format " + format);
  while (is.peek() == '%') std::getline(is, line);
  return h;
}

}  // namespace

CsrMatrix read_matrix_market_sparse(std::istream& is) {
  const MarketHeader h = read_banner(is);
  if (!h.coordinate) {
    is.seekg(0);
    return read_matrix_market_dense(is).sparseView(0.0, 0.0);
  }
  long rows = 0, cols = 0, nnz = 0;
  if (!(is >> rows >> cols >> nnz)) throw std::runtime_error("MatrixMarket: bad size line");
  std::vector<Eigen::Triplet<double, int>> trips;
  trips.reserve(h.symmetric ? 2 * nnz : nnz);
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double v = 0.0;
    if (!(is >> i >> j >> v)) throw std::runtime_error("MatrixMarket: truncated entries");
    trips.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    if (h.symmetric && i != j) trips.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
  }
  CsrMatrix a(rows, cols);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

DenseMatrix read_matrix_market_dense(std::istream& is) {
  const MarketHeader h = read_banner(is);
  if (h.coordinate) {
    is.seekg(0);
    return DenseMatrix(read_matrix_market_sparse(is));
  }
  long rows = 0, cols = 0;
  if (!(is >> rows >> cols)) throw std::runtime_error("MatrixMarket: bad size line");
  DenseMatrix a(rows, cols);
  for (long c = 0; c < cols; ++c)
    for (long r = 0; r < rows; ++r)
      if (!(is >> a(r, c))) throw std::runtime_error("MatrixMarket: truncated entries");
  return a;
}

}  // namespace nitsche
