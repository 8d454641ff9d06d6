#include "nitsche/phi_r.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nitsche/norms.hpp"
#include "nitsche/quadrature.hpp"

namespace nitsche {

double mean_normal_gradient(const FeFunction& f, const BoundaryPatch& patch) {
  const FeSpace& space = f.space();
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::edge, space.order());
  double total = 0.0;
  for (int e : patch.edges) {
    const BoundaryEdge& be = space.mesh().boundary_edges()[e];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const PointValue v = eval(f, be.triangle, FeSpace::edge_point(be.local_edge, rule.points[q](1)));
      total += be.length * rule.weights[q] * v.gradient.dot(be.normal);
    }
  }
  return total / patch.measure;
}

double mean_normal_gradient(const VectorField& grad, const Mesh& mesh, const BoundaryPatch& patch) {
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::edge, 2);
  double total = 0.0;
  for (int e : patch.edges) {
    const BoundaryEdge& be = mesh.boundary_edges()[e];
    const Point& a = mesh.vertices()[be.v[0]];
    const Point& b = mesh.vertices()[be.v[1]];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double t = rule.points[q](1);
      total += be.length * rule.weights[q] * grad((1.0 - t) * a + t * b).dot(be.normal);
    }
  }
  return total / patch.measure;
}

Eigen::VectorXd patch_bump(const FeSpace& p1, const BoundaryPatch& patch) {
  if (p1.order() != 1) throw std::invalid_argument("patch_bump: P1 space required");
  const Mesh& mesh = p1.mesh();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(p1.num_dofs());
  for (int v : patch.interior_vertices) c(v) = 1.0;
  for (int k : patch.triangles)
    if (mesh.is_corner_element(k))
      for (int v : mesh.triangles()[k].v) c(v) = 0.0;
  return c;
}

PhiR build_phi_r(const PatchSet& patches, const std::vector<double>& r, const std::shared_ptr<const FeSpace>& p1) {
  if (r.size() != patches.patches.size()) throw std::invalid_argument("build_phi_r: one target per patch required");
  const double h = p1->mesh().stats().h;
  PhiR out{FeFunction(p1), r, {}, std::numeric_limits<double>::infinity()};
  out.xi.reserve(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    const BoundaryPatch& patch = patches.patches[j];
    FeFunction bump(p1, patch_bump(*p1, patch));
    const double xi = mean_normal_gradient(bump, patch);
    if (!(xi >= 1e-12))
      throw GeometryError("patch " + std::to_string(patch.id) + ": degenerate normal-gradient normalization");
    out.xi.push_back(xi);
    out.c_xi = std::min(out.c_xi, xi * h);
    out.function.coefficients() += (r[j] / xi) * bump.coefficients();
  }
  return out;
}

double phi_r_stability_ratio(const PhiR& phi, const PatchSet& patches) {
  const double h = phi.function.space().mesh().stats().h;
  double data = 0.0;
  for (std::size_t j = 0; j < patches.patches.size(); ++j)
    data += h * phi.targets[j] * phi.targets[j] * patches.patches[j].measure;
  return norm(phi.function, NormKind::one_h) / std::sqrt(data);
}

}  // namespace nitsche
