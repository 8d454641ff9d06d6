#include "nitsche/norms.hpp"

#include <cmath>

#include "nitsche/assembly.hpp"
#include "nitsche/quadrature.hpp"

namespace nitsche {

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::l2: return "L2";
    case NormKind::h1_semi: return "H1semi";
    case NormKind::one_h: return "one_h";
    case NormKind::half_h_boundary: return "half_h_boundary";
    case NormKind::one_h_beta: return "one_h_beta";
    case NormKind::triple_h_delta: return "triple_h_delta";
    case NormKind::star_poisson: return "star_poisson";
    case NormKind::triple_star: return "triple_star";
  }
  return "?";
}

Sampler sampler(const FeFunction& f) {
  return [f](int k, const Eigen::Vector3d& bary) { return eval(f, k, bary); };
}

Sampler error_sampler(const ExactSolution& u, const FeFunction& uh) {
  return [u, uh](int k, const Eigen::Vector3d& bary) {
    const Point x = uh.space().geometry(k).map(bary);
    const PointValue h = eval(uh, k, bary);
    PointValue e;
    e.value = u.value(x) - h.value;
    e.gradient = u.gradient(x) - h.gradient;
    e.laplacian = (u.laplacian ? u.laplacian(x) : 0.0) - h.laplacian;
    return e;
  };
}

NormParts norm_parts(const Sampler& v, const FeSpace& space, const ProblemSpec& p) {
  NormParts out;
  const bool sd = p.stabilization.kind == StabilizationKind::sd && p.stabilization.gamma > 0.0;
  const QuadratureRule& area = quadrature_for(QuadratureDomain::area, space.order());
  for (int k = 0; k < space.num_elements(); ++k) {
    const ElementGeometry& geo = space.geometry(k);
    const double delta = sd ? sd_delta(geo.diameter, p) : 0.0;
    for (std::size_t q = 0; q < area.size(); ++q) {
      const double w = 2.0 * geo.area * area.weights[q];
      const PointValue s = v(k, area.points[q]);
      out.l2 += w * s.value * s.value;
      out.grad += w * s.gradient.squaredNorm();
      if (delta > 0.0) {
        const double stream = p.beta.dot(s.gradient);
        out.streamline += w * delta * stream * stream;
        out.inverse_delta += w * s.value * s.value / delta;
        out.delta_laplacian += w * delta * p.eps * p.eps * s.laplacian * s.laplacian;
      }
    }
  }
  const QuadratureRule& edge = quadrature_for(QuadratureDomain::edge, space.order());
  for (const BoundaryEdge& be : space.mesh().boundary_edges()) {
    const double h = space.geometry(be.triangle).diameter;
    const double bn = std::abs(p.beta.dot(be.normal));
    for (std::size_t q = 0; q < edge.size(); ++q) {
      const double w = be.length * edge.weights[q];
      const PointValue s = v(be.triangle, FeSpace::edge_point(be.local_edge, edge.points[q](1)));
      const double dn = s.gradient.dot(be.normal);
      out.boundary_h += w * s.value * s.value / h;
      out.boundary_beta += w * bn * s.value * s.value;
      out.normal_flux_h += w * h * dn * dn;
    }
  }
  return out;
}

double combine(const NormParts& n, NormKind kind, const ProblemSpec& p) {
  const double one_h2 = n.grad + n.boundary_h;
  switch (kind) {
    case NormKind::l2: return std::sqrt(n.l2);
    case NormKind::h1_semi: return std::sqrt(n.grad);
    case NormKind::one_h: return std::sqrt(one_h2);
    case NormKind::half_h_boundary: return std::sqrt(n.boundary_h);
    case NormKind::one_h_beta: return std::sqrt(p.eps * one_h2 + 0.5 * n.boundary_beta);
    case NormKind::triple_h_delta: return std::sqrt(n.streamline + 0.5 * n.boundary_beta + p.eps * n.grad);
    case NormKind::star_poisson: return std::sqrt(one_h2) + std::sqrt(n.normal_flux_h);
    case NormKind::triple_star:
      return std::sqrt(n.inverse_delta + p.eps * n.normal_flux_h + n.delta_laplacian + p.eps * n.boundary_h +
                       n.streamline + 0.5 * n.boundary_beta + p.eps * n.grad);
  }
  return 0.0;
}

namespace {

void require_velocity(NormKind kind, const ProblemSpec& p) {
  const bool needs = kind == NormKind::one_h_beta || kind == NormKind::triple_h_delta || kind == NormKind::triple_star;
  if (needs && p.beta.squaredNorm() == 0.0)
    throw ConfigError("norm " + std::string(to_string(kind)) + " needs a nonzero velocity");
}

}  // namespace

double norm(const FeFunction& f, NormKind kind, const ProblemSpec& p) {
  require_velocity(kind, p);
  return combine(norm_parts(sampler(f), f.space(), p), kind, p);
}

double error_norm(const ExactSolution& u, const FeFunction& uh, NormKind kind, const ProblemSpec& p) {
  require_velocity(kind, p);
  return combine(norm_parts(error_sampler(u, uh), uh.space(), p), kind, p);
}

ErrorPair errors(const ExactSolution& u, const FeFunction& uh) {
  const NormParts n = norm_parts(error_sampler(u, uh), uh.space());
  return {std::sqrt(n.l2), std::sqrt(n.grad)};
}

}  // namespace nitsche
