#include "nitsche/continuity.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "nitsche/quadrature.hpp"

namespace nitsche {

double nitsche_form(const Sampler& u, const FeFunction& v, const ProblemSpec& p) {
  const FeSpace& space = v.space();
  const double sign = p.bc == BoundaryMode::nitsche_sym ? -1.0 : 1.0;
  double total = 0.0;
  const QuadratureRule& area = quadrature_for(QuadratureDomain::area, space.order());
  for (int k = 0; k < space.num_elements(); ++k) {
    const ElementGeometry& geo = space.geometry(k);
    for (std::size_t q = 0; q < area.size(); ++q)
      total += 2.0 * geo.area * area.weights[q] * u(k, area.points[q]).gradient.dot(eval(v, k, area.points[q]).gradient);
  }
  if (p.bc == BoundaryMode::strong) return total;
  const QuadratureRule& edge = quadrature_for(QuadratureDomain::edge, space.order());
  for (const BoundaryEdge& be : space.mesh().boundary_edges()) {
    const double h = space.geometry(be.triangle).diameter;
    for (std::size_t q = 0; q < edge.size(); ++q) {
      const Eigen::Vector3d bary = FeSpace::edge_point(be.local_edge, edge.points[q](1));
      const PointValue su = u(be.triangle, bary);
      const PointValue sv = eval(v, be.triangle, bary);
      double val = -su.gradient.dot(be.normal) * sv.value + sign * su.value * sv.gradient.dot(be.normal);
      if (p.gamma > 0.0) val += p.gamma / h * su.value * sv.value;
      total += be.length * edge.weights[q] * val;
    }
  }
  return total;
}

std::vector<FeFunction> random_probes(const std::shared_ptr<const FeSpace>& space, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<FeFunction> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd c(space->num_dofs());
    for (Eigen::Index d = 0; d < c.size(); ++d) c(d) = dist(rng);
    out.emplace_back(space, std::move(c));
  }
  return out;
}

double continuity_ratio(const Sampler& u, const std::vector<FeFunction>& probes, const ProblemSpec& p) {
  if (probes.empty()) return 0.0;
  const double u_star = combine(norm_parts(u, probes.front().space()), NormKind::star_poisson);
  double worst = 0.0;
  for (const FeFunction& v : probes) {
    const double v_norm = norm(v, NormKind::one_h);
    if (!(v_norm > 0.0)) throw std::invalid_argument("continuity_ratio: probe with zero norm");
    if (u_star == 0.0) continue;
    worst = std::max(worst, std::abs(nitsche_form(u, v, p)) / (u_star * v_norm));
  }
  return worst;
}

}  // namespace nitsche
