#include "nitsche/fespace.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace nitsche {

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int order) : mesh_(std::move(mesh)), order_(order) {
  if (order_ != 1 && order_ != 2) throw std::invalid_argument("FeSpace: order must be 1 or 2");
  const Mesh& m = *mesh_;
  const auto& verts = m.vertices();
  const auto& tris = m.triangles();
  const auto& edges = m.edges();
  const int nv = static_cast<int>(verts.size());

  // Edge dofs numbered by sorted vertex pair.
  std::vector<int> edge_rank(edges.size());
  if (order_ == 2) {
    std::vector<int> perm(edges.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](int a, int b) { return edges[a].v < edges[b].v; });
    for (std::size_t r = 0; r < perm.size(); ++r) edge_rank[perm[r]] = static_cast<int>(r);
  }

  num_dofs_ = order_ == 1 ? nv : nv + static_cast<int>(edges.size());
  dof_coords_.resize(num_dofs_);
  std::copy(verts.begin(), verts.end(), dof_coords_.begin());
  if (order_ == 2) {
    for (std::size_t e = 0; e < edges.size(); ++e)
      dof_coords_[nv + edge_rank[e]] = 0.5 * (verts[edges[e].v[0]] + verts[edges[e].v[1]]);
  }

  const int ndpe = dofs_per_element();
  element_dofs_.resize(tris.size() * ndpe);
  geometry_.resize(tris.size());
  for (int k = 0; k < static_cast<int>(tris.size()); ++k) {
    const auto& v = tris[k].v;
    int* dofs = element_dofs_.data() + static_cast<std::size_t>(k) * ndpe;
    for (int i = 0; i < 3; ++i) dofs[i] = v[i];
    if (order_ == 2)
      for (int i = 0; i < 3; ++i) dofs[3 + i] = nv + edge_rank[m.triangle_edge(k, i)];

    ElementGeometry& g = geometry_[k];
    for (int i = 0; i < 3; ++i) g.vertices[i] = verts[v[i]];
    Eigen::Matrix2d jac;
    jac.col(0) = g.vertices[1] - g.vertices[0];
    jac.col(1) = g.vertices[2] - g.vertices[0];
    const Eigen::Matrix2d inv_t = jac.inverse().transpose();
    g.grad_lambda[1] = inv_t.col(0);
    g.grad_lambda[2] = inv_t.col(1);
    g.grad_lambda[0] = -(g.grad_lambda[1] + g.grad_lambda[2]);
    g.area = 0.5 * jac.determinant();
    g.diameter = m.element_diameter(k);
  }

  boundary_flag_.assign(num_dofs_, false);
  std::vector<int> segment_of(num_dofs_, -1);
  for (const auto& be : m.boundary_edges()) {
    std::vector<int> local = local_edge_dofs(be.local_edge);
    const auto dofs = element_dofs(be.triangle);
    for (int l : local) {
      const int d = dofs[l];
      boundary_flag_[d] = true;
      if (segment_of[d] < 0) segment_of[d] = be.segment;
    }
  }
  for (int d = 0; d < num_dofs_; ++d) {
    if (!boundary_flag_[d]) continue;
    boundary_dofs_.push_back(d);
    boundary_dof_segments_.push_back(segment_of[d]);
  }
}

Eigen::Vector3d FeSpace::edge_point(int local_edge, double t) {
  Eigen::Vector3d bary = Eigen::Vector3d::Zero();
  bary((local_edge + 1) % 3) = 1.0 - t;
  bary((local_edge + 2) % 3) = t;
  return bary;
}

std::vector<int> FeSpace::local_edge_dofs(int local_edge) const {
  std::vector<int> out{(local_edge + 1) % 3, (local_edge + 2) % 3};
  if (order_ == 2) out.push_back(3 + local_edge);
  return out;
}

FeFunction::FeFunction(std::shared_ptr<const FeSpace> space)
    : space_(std::move(space)), coeffs_(Eigen::VectorXd::Zero(space_->num_dofs())) {}

FeFunction::FeFunction(std::shared_ptr<const FeSpace> space, Eigen::VectorXd coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != space_->num_dofs()) throw std::invalid_argument("FeFunction: coefficient length != dof count");
}

PointValue eval(const FeFunction& f, int element, const Eigen::Vector3d& bary) {
  const FeSpace& space = f.space();
  const BasisValues b = space.basis(element, bary);
  const auto dofs = space.element_dofs(element);
  PointValue out;
  for (int i = 0; i < static_cast<int>(dofs.size()); ++i) {
    const double c = f.coefficients()(dofs[i]);
    out.value += c * b.values(i);
    out.gradient += c * b.gradients.row(i).transpose();
    out.laplacian += c * b.laplacians(i);
  }
  return out;
}

FeFunction nodal_interpolate(const std::shared_ptr<const FeSpace>& space, const ScalarField& u) {
  Eigen::VectorXd c(space->num_dofs());
  const auto& x = space->dof_coordinates();
  for (int d = 0; d < space->num_dofs(); ++d) c(d) = u(x[d]);
  return FeFunction(space, std::move(c));
}

FeFunction prolongate(const FeFunction& p1, const std::shared_ptr<const FeSpace>& target) {
  if (p1.space().order() != 1) throw std::invalid_argument("prolongate: source must be P1");
  if (&p1.space().mesh() != &target->mesh()) throw std::invalid_argument("prolongate: spaces on different meshes");
  if (target->order() == 1) return FeFunction(target, p1.coefficients());
  Eigen::VectorXd c(target->num_dofs());
  const auto& src = p1.coefficients();
  for (int k = 0; k < target->num_elements(); ++k) {
    const auto dofs = target->element_dofs(k);
    for (int i = 0; i < 3; ++i) c(dofs[i]) = src(dofs[i]);
    for (int i = 0; i < 3; ++i) c(dofs[3 + i]) = 0.5 * (src(dofs[(i + 1) % 3]) + src(dofs[(i + 2) % 3]));
  }
  return FeFunction(target, std::move(c));
}

}  // namespace nitsche
