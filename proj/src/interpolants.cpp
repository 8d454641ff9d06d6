#include "nitsche/interpolants.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nitsche/assembly.hpp"
#include "nitsche/linalg.hpp"

namespace nitsche {

PiPartial build_pi_partial(const ExactSolution& u, const std::shared_ptr<const FeSpace>& space,
                           const PatchSet& patches) {
  const FeFunction nodal = nodal_interpolate(space, u.value);
  auto p1 = space->order() == 1 ? space : std::make_shared<const FeSpace>(space->mesh_ptr(), 1);
  std::vector<double> r;
  r.reserve(patches.patches.size());
  for (const BoundaryPatch& patch : patches.patches)
    r.push_back(mean_normal_gradient(u.gradient, space->mesh(), patch) - mean_normal_gradient(nodal, patch));

  PiPartial out{nodal, build_phi_r(patches, r, p1), {}};
  out.function.coefficients() += prolongate(out.correction.function, space).coefficients();
  for (const BoundaryPatch& patch : patches.patches) {
    const double diff = mean_normal_gradient(out.function, patch) - mean_normal_gradient(u.gradient, space->mesh(), patch);
    out.residuals.push_back(std::abs(diff) * patch.measure);
  }
  return out;
}

FeFunction l2_projection(const ScalarField& u, const std::shared_ptr<const FeSpace>& space) {
  return FeFunction(space, solve_direct(mass_matrix(*space), load_vector(*space, u)));
}

std::vector<CipPatch> build_cip_patches(const Mesh& mesh, const PatchSet& patches) {
  const int nv = static_cast<int>(mesh.vertices().size());
  std::vector<std::vector<int>> neighbors(nv), star(nv);
  for (const Edge& e : mesh.edges()) {
    neighbors[e.v[0]].push_back(e.v[1]);
    neighbors[e.v[1]].push_back(e.v[0]);
  }
  for (int k = 0; k < static_cast<int>(mesh.triangles().size()); ++k)
    for (int v : mesh.triangles()[k].v) star[v].push_back(k);
  std::vector<int> boundary_index(mesh.edges().size(), -1);
  for (int b = 0; b < static_cast<int>(mesh.boundary_edges().size()); ++b) boundary_index[mesh.boundary_edges()[b].edge] = b;

  std::vector<CipPatch> out;
  out.reserve(patches.patches.size());
  for (const BoundaryPatch& patch : patches.patches) {
    const std::set<int> face(patch.vertices.begin(), patch.vertices.end());
    const std::set<int> own_edges(patch.edges.begin(), patch.edges.end());
    std::set<int> tris(patch.triangles.begin(), patch.triangles.end());
    for (int v = 0; v < nv; ++v) {
      if (mesh.is_boundary_vertex(v)) continue;
      const auto hits = std::count_if(neighbors[v].begin(), neighbors[v].end(), [&](int w) { return face.count(w) > 0; });
      if (hits >= 2) tris.insert(star[v].begin(), star[v].end());
    }

    CipPatch cp;
    cp.triangles.assign(tris.begin(), tris.end());
    for (int k : cp.triangles) cp.area += mesh.signed_area(k);
    std::set<int> nodes;
    for (int k : cp.triangles)
      for (int v : mesh.triangles()[k].v) nodes.insert(v);
    for (int v : nodes) {
      if (mesh.is_boundary_vertex(v)) continue;
      const bool inside = std::all_of(star[v].begin(), star[v].end(), [&](int k) { return tris.count(k) > 0; });
      bool foreign = false;
      for (int k : star[v])
        for (int i = 0; i < 3; ++i) {
          const int b = boundary_index[mesh.triangle_edge(k, i)];
          if (b >= 0 && own_edges.count(b) == 0) foreign = true;
        }
      if (inside && !foreign) cp.interior_nodes.push_back(v);
    }
    std::set<int> corner;
    for (int k : patch.triangles)
      if (mesh.is_corner_element(k)) corner.insert(mesh.triangles()[k].v.begin(), mesh.triangles()[k].v.end());
    for (int v : patch.interior_vertices)
      if (corner.count(v) == 0) cp.face_nodes.push_back(v);
    out.push_back(std::move(cp));
  }
  return out;
}

namespace {

Eigen::VectorXd indicator(int n, const std::vector<int>& nodes) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int v : nodes) c(v) = 1.0;
  return c;
}

/// Exact integral of a P1 function over a set of triangles.
double integrate_p1(const FeSpace& p1, const Eigen::VectorXd& c, const std::vector<int>& triangles) {
  double total = 0.0;
  for (int k : triangles) {
    const auto dofs = p1.element_dofs(k);
    total += p1.geometry(k).area * (c(dofs[0]) + c(dofs[1]) + c(dofs[2])) / 3.0;
  }
  return total;
}

}  // namespace

PiCip build_pi_cip(const ExactSolution& u, const std::shared_ptr<const FeSpace>& p1, const PatchSet& patches) {
  if (p1->order() != 1) throw ConfigError("pi_CIP is defined for P1 only");
  const int n = p1->num_dofs();
  PiCip out{FeFunction(p1), l2_projection(u.value, p1), build_cip_patches(p1->mesh(), patches), {}};
  out.function = out.projection;

  std::vector<Eigen::VectorXd> components;
  for (std::size_t i = 0; i < patches.patches.size(); ++i) {
    const BoundaryPatch& face = patches.patches[i];
    const CipPatch& cp = out.patches[i];
    const FeFunction wi(p1, indicator(n, cp.interior_nodes));
    const FeFunction wf(p1, indicator(n, cp.face_nodes));

    CipPatchSolve s;
    s.target = mean_normal_gradient(u.gradient, p1->mesh(), face) - mean_normal_gradient(out.projection, face);
    s.system << integrate_p1(*p1, wi.coefficients(), cp.triangles), integrate_p1(*p1, wf.coefficients(), cp.triangles),
        mean_normal_gradient(wi, face), mean_normal_gradient(wf, face);
    s.sign_pattern = s.system(0, 0) > 0 && s.system(0, 1) > 0 && s.system(1, 0) < 0 && s.system(1, 1) > 0;
    const double det = s.system.determinant();
    if (!(std::abs(det) > 1e-14 * s.system.cwiseAbs().maxCoeff() * s.system.cwiseAbs().maxCoeff()))
      throw GeometryError("pi_CIP: singular patch system on patch " + std::to_string(face.id));
    const Eigen::Vector2d ab = s.system.inverse() * Eigen::Vector2d(0.0, s.target);
    s.a = ab(0);
    s.b = ab(1);
    components.push_back(s.a * wi.coefficients() + s.b * wf.coefficients());
    s.mean_residual = std::abs(integrate_p1(*p1, components.back(), cp.triangles)) / cp.area;
    out.function.coefficients() += components.back();
    out.solves.push_back(s);
  }
  const FeFunction correction(p1, out.function.coefficients() - out.projection.coefficients());
  for (std::size_t i = 0; i < patches.patches.size(); ++i)
    out.solves[i].gradient_residual =
        std::abs(mean_normal_gradient(correction, patches.patches[i]) - out.solves[i].target);
  return out;
}

}  // namespace nitsche
