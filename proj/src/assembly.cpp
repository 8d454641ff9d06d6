#include "nitsche/assembly.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nitsche/quadrature.hpp"

namespace nitsche {

namespace {

using Triplet = Eigen::Triplet<double, int>;
using LocalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxLocalDofs, kMaxLocalDofs>;

CsrMatrix from_triplets(int n, const std::vector<Triplet>& trips) {
  CsrMatrix a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

void scatter(std::vector<Triplet>& trips, std::span<const int> dofs, const LocalMatrix& local) {
  for (int i = 0; i < local.rows(); ++i)
    for (int j = 0; j < local.cols(); ++j) trips.emplace_back(dofs[i], dofs[j], local(i, j));
}

/// Volume integrand: called with basis values and the physical point,
/// accumulates into the local matrix with the given quadrature weight.
template <typename Integrand>
CsrMatrix assemble_volume(const FeSpace& space, Integrand&& integrand) {
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::area, space.order());
  const int ndpe = space.dofs_per_element();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(space.num_elements()) * ndpe * ndpe);
  LocalMatrix local(ndpe, ndpe);
  for (int k = 0; k < space.num_elements(); ++k) {
    const ElementGeometry& geo = space.geometry(k);
    local.setZero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const BasisValues b = space.basis(k, rule.points[q]);
      integrand(k, b, geo.map(rule.points[q]), 2.0 * geo.area * rule.weights[q], local);
    }
    scatter(trips, space.element_dofs(k), local);
  }
  return from_triplets(space.num_dofs(), trips);
}

/// Boundary integrand over each boundary edge, evaluated from the owning
/// element.
template <typename Integrand>
CsrMatrix assemble_boundary(const FeSpace& space, Integrand&& integrand) {
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::edge, space.order());
  const int ndpe = space.dofs_per_element();
  std::vector<Triplet> trips;
  LocalMatrix local(ndpe, ndpe);
  for (const BoundaryEdge& be : space.mesh().boundary_edges()) {
    const ElementGeometry& geo = space.geometry(be.triangle);
    local.setZero();
    bool touched = false;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector3d bary = FeSpace::edge_point(be.local_edge, rule.points[q](1));
      const BasisValues b = space.basis(be.triangle, bary);
      touched |= integrand(be, geo, b, geo.map(bary), be.length * rule.weights[q], local);
    }
    if (touched) scatter(trips, space.element_dofs(be.triangle), local);
  }
  return from_triplets(space.num_dofs(), trips);
}

template <typename Integrand>
void assemble_boundary_rhs(const FeSpace& space, Eigen::VectorXd& rhs, Integrand&& integrand) {
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::edge, space.order());
  for (const BoundaryEdge& be : space.mesh().boundary_edges()) {
    const ElementGeometry& geo = space.geometry(be.triangle);
    const auto dofs = space.element_dofs(be.triangle);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector3d bary = FeSpace::edge_point(be.local_edge, rule.points[q](1));
      const BasisValues b = space.basis(be.triangle, bary);
      const double w = be.length * rule.weights[q];
      for (int i = 0; i < b.values.size(); ++i) rhs(dofs[i]) += w * integrand(be, geo, b, i, geo.map(bary));
    }
  }
}

double adjoint_sign(BoundaryMode mode) { return mode == BoundaryMode::nitsche_sym ? -1.0 : 1.0; }

void require_nitsche_nonsym(const ProblemSpec& p, const char* who) {
  if (p.bc != BoundaryMode::nitsche_nonsym)
    throw ConfigError(std::string(who) + ": requires the non-symmetric Nitsche boundary mode");
}

Eigen::VectorXd sd_rhs(const FeSpace& space, const ProblemSpec& p) {
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::area, space.order());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.num_dofs());
  for (int k = 0; k < space.num_elements(); ++k) {
    const ElementGeometry& geo = space.geometry(k);
    const double delta = sd_delta(geo.diameter, p);
    if (delta == 0.0) continue;
    const auto dofs = space.element_dofs(k);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const BasisValues b = space.basis(k, rule.points[q]);
      const double w = 2.0 * geo.area * rule.weights[q] * delta * p.f(geo.map(rule.points[q]));
      const LocalVector stream = b.gradients * p.beta;
      for (int i = 0; i < stream.size(); ++i) rhs(dofs[i]) += w * stream(i);
    }
  }
  return rhs;
}

/// Local edge of triangle k coinciding with global edge e.
int local_edge_of(const Mesh& mesh, int k, int e) {
  for (int i = 0; i < 3; ++i)
    if (mesh.triangle_edge(k, i) == e) return i;
  return -1;
}

/// Barycentric point in triangle k at parameter s along edge e, measured
/// from global vertex `from`.
Eigen::Vector3d edge_point_from(const Mesh& mesh, int k, int le, int from, double s) {
  const int start = mesh.triangles()[k].v[(le + 1) % 3];
  return FeSpace::edge_point(le, start == from ? s : 1.0 - s);
}

/// Nitsche boundary rhs terms shared by Poisson and convection-diffusion:
/// sign <g, grad v.n> + gamma h_K^{-1} <g, v>, all scaled by eps.
void add_nitsche_rhs(const FeSpace& space, const ProblemSpec& p, Eigen::VectorXd& rhs) {
  const double sign = adjoint_sign(p.bc);
  assemble_boundary_rhs(space, rhs,
                        [&](const BoundaryEdge& be, const ElementGeometry& geo, const BasisValues& b, int i,
                            const Point& x) {
                          const double g = p.g(x);
                          double val = sign * g * b.gradients.row(i).dot(be.normal);
                          if (p.gamma > 0.0) val += p.gamma / geo.diameter * g * b.values(i);
                          return p.eps * val;
                        });
}

CsrMatrix poisson_nitsche_matrix(const FeSpace& space, const ProblemSpec& p) {
  CsrMatrix a = stiffness_matrix(space);
  a += nitsche_flux_matrix(space);
  if (p.bc == BoundaryMode::nitsche_sym)
    a -= nitsche_adjoint_matrix(space);
  else
    a += nitsche_adjoint_matrix(space);
  if (p.gamma > 0.0) a += boundary_penalty_matrix(space, p.gamma);
  if (p.eps != 1.0) a *= p.eps;
  return a;
}

CsrMatrix convdiff_matrix(const FeSpace& space, const ProblemSpec& p) {
  CsrMatrix a = mass_matrix(space) * p.sigma;
  a += convection_matrix(space, p.beta);
  a += inflow_matrix(space, p.beta);
  a += poisson_nitsche_matrix(space, p);
  return a;
}

Eigen::VectorXd convdiff_rhs(const FeSpace& space, const ProblemSpec& p) {
  Eigen::VectorXd rhs = load_vector(space, p.f);
  add_nitsche_rhs(space, p, rhs);
  assemble_boundary_rhs(space, rhs,
                        [&](const BoundaryEdge& be, const ElementGeometry&, const BasisValues& b, int i,
                            const Point& x) {
                          const double bn = p.beta.dot(be.normal);
                          return bn < 0.0 ? -bn * p.g(x) * b.values(i) : 0.0;
                        });
  return rhs;
}

}  // namespace

CsrMatrix stiffness_matrix(const FeSpace& space) {
  return assemble_volume(space, [](int, const BasisValues& b, const Point&, double w, LocalMatrix& local) {
    local.noalias() += w * b.gradients * b.gradients.transpose();
  });
}

CsrMatrix mass_matrix(const FeSpace& space) {
  return assemble_volume(space, [](int, const BasisValues& b, const Point&, double w, LocalMatrix& local) {
    local.noalias() += w * b.values * b.values.transpose();
  });
}

CsrMatrix convection_matrix(const FeSpace& space, const Point& beta) {
  return assemble_volume(space, [&beta](int, const BasisValues& b, const Point&, double w, LocalMatrix& local) {
    const LocalVector stream = b.gradients * beta;
    local.noalias() += w * b.values * stream.transpose();
  });
}

CsrMatrix nitsche_flux_matrix(const FeSpace& space) {
  return assemble_boundary(space, [](const BoundaryEdge& be, const ElementGeometry&, const BasisValues& b,
                                     const Point&, double w, LocalMatrix& local) {
    const LocalVector dn = b.gradients * be.normal;
    local.noalias() -= w * b.values * dn.transpose();
    return true;
  });
}

CsrMatrix nitsche_adjoint_matrix(const FeSpace& space) {
  return assemble_boundary(space, [](const BoundaryEdge& be, const ElementGeometry&, const BasisValues& b,
                                     const Point&, double w, LocalMatrix& local) {
    const LocalVector dn = b.gradients * be.normal;
    local.noalias() += w * dn * b.values.transpose();
    return true;
  });
}

CsrMatrix boundary_penalty_matrix(const FeSpace& space, double gamma) {
  return boundary_mass_matrix(space, [gamma](const BoundaryEdge&, double h_k) { return gamma / h_k; });
}

CsrMatrix inflow_matrix(const FeSpace& space, const Point& beta) {
  return boundary_mass_matrix(space, [&beta](const BoundaryEdge& be, double) {
    const double bn = beta.dot(be.normal);
    return bn < 0.0 ? -bn : 0.0;
  });
}

CsrMatrix boundary_mass_matrix(const FeSpace& space, const EdgeWeight& weight) {
  return assemble_boundary(space, [&weight](const BoundaryEdge& be, const ElementGeometry& geo, const BasisValues& b,
                                            const Point&, double w, LocalMatrix& local) {
    const double c = weight(be, geo.diameter);
    if (c == 0.0) return false;
    local.noalias() += (w * c) * b.values * b.values.transpose();
    return true;
  });
}

double sd_delta(double h_k, const ProblemSpec& p) {
  const double speed = p.beta.norm();
  if (speed == 0.0) return 0.0;
  const double peclet = speed * h_k / p.eps;
  return peclet > 1.0 ? p.stabilization.gamma * h_k / speed : 0.0;
}

CsrMatrix streamline_matrix(const FeSpace& space, const ProblemSpec& p) {
  return assemble_volume(space, [&](int k, const BasisValues& b, const Point&, double w, LocalMatrix& local) {
    const double delta = sd_delta(space.geometry(k).diameter, p);
    if (delta == 0.0) return;
    const LocalVector stream = b.gradients * p.beta;
    local.noalias() += (w * delta) * stream * stream.transpose();
    local.noalias() -= (w * delta * p.eps) * stream * b.laplacians.transpose();
  });
}

CsrMatrix cip_matrix(const FeSpace& space, const Point& beta, double gamma_cip, EdgeOrientation orientation) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::edge, space.order());
  const int ndpe = space.dofs_per_element();
  std::vector<Triplet> trips;
  std::vector<int> dofs(2 * ndpe);
  Eigen::VectorXd jump(2 * ndpe);
  for (int e = 0; e < static_cast<int>(mesh.edges().size()); ++e) {
    const Edge& edge = mesh.edges()[e];
    if (edge.is_boundary()) continue;
    int from = edge.v[0], to = edge.v[1];
    if (orientation == EdgeOrientation::high_to_low) std::swap(from, to);
    const Point t = mesh.vertices()[to] - mesh.vertices()[from];
    const double length = t.norm();
    const Point n(t.y() / length, -t.x() / length);
    const double weight = gamma_cip * length * length * std::abs(beta.dot(n));
    if (weight == 0.0) continue;

    const int ka = edge.tri[0], kb = edge.tri[1];
    const int la = local_edge_of(mesh, ka, e), lb = local_edge_of(mesh, kb, e);
    const auto da = space.element_dofs(ka), db = space.element_dofs(kb);
    for (int i = 0; i < ndpe; ++i) {
      dofs[i] = da[i];
      dofs[ndpe + i] = db[i];
    }
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(2 * ndpe, 2 * ndpe);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double s = rule.points[q](1);
      const BasisValues ba = space.basis(ka, edge_point_from(mesh, ka, la, from, s));
      const BasisValues bb = space.basis(kb, edge_point_from(mesh, kb, lb, from, s));
      jump.head(ndpe) = ba.gradients * n;
      jump.tail(ndpe) = -(bb.gradients * n);
      local.noalias() += (weight * length * rule.weights[q]) * jump * jump.transpose();
    }
    for (int i = 0; i < 2 * ndpe; ++i)
      for (int j = 0; j < 2 * ndpe; ++j) trips.emplace_back(dofs[i], dofs[j], local(i, j));
  }
  return from_triplets(space.num_dofs(), trips);
}

Eigen::VectorXd load_vector(const FeSpace& space, const ScalarField& f) {
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::area, space.order());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.num_dofs());
  for (int k = 0; k < space.num_elements(); ++k) {
    const ElementGeometry& geo = space.geometry(k);
    const auto dofs = space.element_dofs(k);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const BasisValues b = space.basis(k, rule.points[q]);
      const double w = 2.0 * geo.area * rule.weights[q] * f(geo.map(rule.points[q]));
      for (int i = 0; i < b.values.size(); ++i) rhs(dofs[i]) += w * b.values(i);
    }
  }
  return rhs;
}

AssembledSystem assemble_poisson_nitsche(std::shared_ptr<const FeSpace> space, const ProblemSpec& p) {
  p.validate();
  if (p.bc == BoundaryMode::strong) throw ConfigError("assemble_poisson_nitsche: strong mode uses assemble_strong");
  AssembledSystem sys;
  sys.matrix = poisson_nitsche_matrix(*space, p);
  sys.rhs = load_vector(*space, p.f);
  add_nitsche_rhs(*space, p, sys.rhs);
  sys.space = std::move(space);
  sys.problem = p;
  return sys;
}

AssembledSystem assemble_strong(std::shared_ptr<const FeSpace> space, const ProblemSpec& p) {
  p.validate();
  if (p.bc != BoundaryMode::strong) throw ConfigError("assemble_strong: requires the strong boundary mode");
  const FeSpace& s = *space;
  CsrMatrix volume = stiffness_matrix(s);
  if (p.eps != 1.0) volume *= p.eps;
  if (p.sigma != 0.0) volume += mass_matrix(s) * p.sigma;
  if (p.beta.squaredNorm() > 0.0) volume += convection_matrix(s, p.beta);
  Eigen::VectorXd rhs = load_vector(s, p.f);
  if (p.stabilization.kind == StabilizationKind::sd && p.stabilization.gamma > 0.0) {
    if (p.sigma != 0.0) throw ConfigError("streamline diffusion requires sigma = 0");
    volume += streamline_matrix(s, p);
    rhs += sd_rhs(s, p);
  } else if (p.stabilization.kind == StabilizationKind::cip && p.stabilization.gamma > 0.0) {
    volume += cip_matrix(s, p.beta, p.stabilization.gamma);
  }

  const int n = s.num_dofs();
  Eigen::VectorXd lifted = Eigen::VectorXd::Zero(n);
  for (int d : s.boundary_dofs()) lifted(d) = p.g(s.dof_coordinates()[d]);
  std::vector<Triplet> trips;
  trips.reserve(volume.nonZeros());
  for (int r = 0; r < n; ++r) {
    if (s.is_boundary_dof(r)) {
      trips.emplace_back(r, r, 1.0);
      rhs(r) = lifted(r);
      continue;
    }
    for (CsrMatrix::InnerIterator it(volume, r); it; ++it) {
      if (s.is_boundary_dof(static_cast<int>(it.col())))
        rhs(r) -= it.value() * lifted(it.col());
      else
        trips.emplace_back(r, static_cast<int>(it.col()), it.value());
    }
  }
  AssembledSystem sys;
  sys.matrix = from_triplets(n, trips);
  sys.rhs = std::move(rhs);
  sys.space = std::move(space);
  sys.problem = p;
  return sys;
}

AssembledSystem assemble_convdiff(std::shared_ptr<const FeSpace> space, const ProblemSpec& p) {
  p.validate();
  require_nitsche_nonsym(p, "assemble_convdiff");
  if (p.stabilization.kind != StabilizationKind::none && p.stabilization.gamma > 0.0)
    throw ConfigError("assemble_convdiff: stabilized problems use assemble_sd / assemble_cip");
  AssembledSystem sys;
  sys.matrix = convdiff_matrix(*space, p);
  sys.rhs = convdiff_rhs(*space, p);
  sys.space = std::move(space);
  sys.problem = p;
  return sys;
}

AssembledSystem assemble_sd(std::shared_ptr<const FeSpace> space, const ProblemSpec& p) {
  p.validate();
  require_nitsche_nonsym(p, "assemble_sd");
  if (p.stabilization.kind != StabilizationKind::sd) throw ConfigError("assemble_sd: stabilization must be SD");
  if (p.sigma != 0.0) throw ConfigError("streamline diffusion requires sigma = 0");
  AssembledSystem sys;
  sys.matrix = convdiff_matrix(*space, p);
  sys.rhs = convdiff_rhs(*space, p);
  if (p.stabilization.gamma > 0.0) {
    sys.matrix += streamline_matrix(*space, p);
    sys.rhs += sd_rhs(*space, p);
  }
  sys.space = std::move(space);
  sys.problem = p;
  return sys;
}

AssembledSystem assemble_cip(std::shared_ptr<const FeSpace> space, const ProblemSpec& p) {
  p.validate();
  require_nitsche_nonsym(p, "assemble_cip");
  if (p.stabilization.kind != StabilizationKind::cip) throw ConfigError("assemble_cip: stabilization must be CIP");
  AssembledSystem sys;
  sys.matrix = convdiff_matrix(*space, p);
  if (p.stabilization.gamma > 0.0) sys.matrix += cip_matrix(*space, p.beta, p.stabilization.gamma);
  sys.rhs = convdiff_rhs(*space, p);
  sys.space = std::move(space);
  sys.problem = p;
  return sys;
}

AssembledSystem assemble(std::shared_ptr<const FeSpace> space, const ProblemSpec& p) {
  if (p.bc == BoundaryMode::strong) return assemble_strong(std::move(space), p);
  switch (p.stabilization.kind) {
    case StabilizationKind::sd: return assemble_sd(std::move(space), p);
    case StabilizationKind::cip: return assemble_cip(std::move(space), p);
    case StabilizationKind::none: break;
  }
  if (!p.has_convection()) return assemble_poisson_nitsche(std::move(space), p);
  return assemble_convdiff(std::move(space), p);
}

SdReport sd_report(const FeSpace& space, const ProblemSpec& p) {
  SdReport rep;
  const double speed = p.beta.norm();
  for (int k = 0; k < space.num_elements(); ++k) {
    const double h = space.geometry(k).diameter;
    rep.max_peclet = std::max(rep.max_peclet, speed * h / p.eps);
    if (sd_delta(h, p) > 0.0) ++rep.stabilized_elements;
  }
  if (space.order() == 1) {
    rep.inverse_constant = 0.0;
    rep.gamma_bound = std::numeric_limits<double>::infinity();
    return rep;
  }
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::area, space.order());
  const int ndpe = space.dofs_per_element();
  double c2 = 0.0;
  for (int k = 0; k < space.num_elements(); ++k) {
    const ElementGeometry& geo = space.geometry(k);
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(ndpe, ndpe);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Ones(ndpe, ndpe);  // + 1 1^T removes the constant null space
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const BasisValues b = space.basis(k, rule.points[q]);
      const double w = 2.0 * geo.area * rule.weights[q];
      lap.noalias() += w * b.laplacians * b.laplacians.transpose();
      grad.noalias() += w * b.gradients * b.gradients.transpose();
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(lap, grad, Eigen::EigenvaluesOnly);
    c2 = std::max(c2, geo.diameter * geo.diameter * es.eigenvalues().maxCoeff());
  }
  rep.inverse_constant = std::sqrt(c2);
  rep.gamma_bound = 1.0 / c2;
  return rep;
}

FeFunction solve(const AssembledSystem& sys, SolverKind solver) {
  if (solver == SolverKind::direct) return FeFunction(sys.space, solve_direct(sys.matrix, sys.rhs));
  IterativeResult res = solve_bicgstab(sys.matrix, sys.rhs);
  using Status = IterativeReport::Status;
  if (res.report.status == Status::breakdown)
    throw SolverError(SolverError::Kind::breakdown, "BiCGSTAB breakdown after " +
                                                        std::to_string(res.report.iterations) + " iterations");
  if (!res.report.converged())
    throw SolverError(SolverError::Kind::inaccurate,
                      "BiCGSTAB stopped at relative residual " + std::to_string(res.report.relative_residual));
  return FeFunction(sys.space, std::move(res.x));
}

}  // namespace nitsche
