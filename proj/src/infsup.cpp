#include "nitsche/infsup.hpp"

#include <cmath>

#include "nitsche/assembly.hpp"

namespace nitsche {

CsrMatrix norm_gram_matrix(const FeSpace& space, InfSupForm form, const ProblemSpec& p) {
  CsrMatrix m = stiffness_matrix(space);
  m += boundary_mass_matrix(space, [](const BoundaryEdge&, double h_k) { return 1.0 / h_k; });
  if (form == InfSupForm::poisson_nitsche) return m;
  m *= p.eps;
  m += boundary_mass_matrix(space, [&p](const BoundaryEdge& be, double) { return 0.5 * std::abs(p.beta.dot(be.normal)); });
  return m;
}

InfSupResult infsup_constant(InfSupForm form, const std::shared_ptr<const FeSpace>& space, const ProblemSpec& p,
                             int dense_cap) {
  if (space->num_dofs() > dense_cap)
    throw ConfigError("inf-sup: " + std::to_string(space->num_dofs()) + " dofs exceed the dense cap of " +
                      std::to_string(dense_cap) + "; use a coarser mesh");
  ProblemSpec q = p;
  q.stabilization = {};
  if (form == InfSupForm::poisson_nitsche) {
    q.eps = 1.0;
    q.beta = Point::Zero();
    q.sigma = 0.0;
    if (q.bc == BoundaryMode::strong) throw ConfigError("inf-sup: weak boundary mode required");
  } else {
    q.bc = BoundaryMode::nitsche_nonsym;
  }
  const AssembledSystem sys =
      form == InfSupForm::poisson_nitsche ? assemble_poisson_nitsche(space, q) : assemble_convdiff(space, q);
  const DenseMatrix a(sys.matrix);
  const DenseMatrix m(norm_gram_matrix(*space, form, q));

  Eigen::LLT<DenseMatrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw SolverError(SolverError::Kind::not_positive_definite, "inf-sup: norm Gram matrix is not positive definite");
  const DenseMatrix s = a.transpose() * llt.solve(a);
  const EigenPair pair = smallest_generalized_eig(0.5 * (s + s.transpose()), m);

  InfSupResult out{std::sqrt(std::max(pair.value, 0.0)), FeFunction(space, pair.vector), space->num_dofs()};
  const double scale = std::sqrt(pair.vector.dot(m * pair.vector));
  if (scale > 0.0) out.minimizer.coefficients() /= scale;
  return out;
}

}  // namespace nitsche
