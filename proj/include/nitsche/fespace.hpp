#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nitsche/basis.hpp"
#include "nitsche/mesh.hpp"

namespace nitsche {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

using BasisValues = BasisValuesT<double>;
using LocalVector = LocalVectorT<double>;

struct ElementGeometry {
  std::array<Point, 3> vertices;
  std::array<Point, 3> grad_lambda;
  double area = 0.0;
  double diameter = 0.0;  // h_K

  Point map(const Eigen::Vector3d& bary) const {
    return bary(0) * vertices[0] + bary(1) * vertices[1] + bary(2) * vertices[2];
  }
};

/// Continuous Lagrange space V_h^k, k in {1, 2}.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const Mesh> mesh, int order);

  int order() const { return order_; }
  int num_dofs() const { return num_dofs_; }
  int dofs_per_element() const { return order_ == 1 ? 3 : 6; }
  int num_elements() const { return static_cast<int>(geometry_.size()); }

  std::span<const int> element_dofs(int k) const {
    return {element_dofs_.data() + static_cast<std::size_t>(k) * dofs_per_element(),
            static_cast<std::size_t>(dofs_per_element())};
  }
  const std::vector<Point>& dof_coordinates() const { return dof_coords_; }
  const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
  /// Side of the unit square (or tagged segment) owning each boundary dof.
  const std::vector<int>& boundary_dof_segments() const { return boundary_dof_segments_; }
  bool is_boundary_dof(int d) const { return boundary_flag_[d]; }

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const ElementGeometry& geometry(int k) const { return geometry_[k]; }

  BasisValues basis(int k, const Eigen::Vector3d& bary) const {
    return lagrange_basis<double>(order_, bary, geometry_[k].grad_lambda);
  }

  /// Barycentric coordinates of the point at parameter t on local edge i,
  /// running from local vertex (i+1)%3 to (i+2)%3.
  static Eigen::Vector3d edge_point(int local_edge, double t);

  /// Local dofs supported on local edge i (endpoints, then midpoint for P2).
  std::vector<int> local_edge_dofs(int local_edge) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int order_;
  int num_dofs_ = 0;
  std::vector<int> element_dofs_;
  std::vector<Point> dof_coords_;
  std::vector<int> boundary_dofs_;
  std::vector<int> boundary_dof_segments_;
  std::vector<bool> boundary_flag_;
  std::vector<ElementGeometry> geometry_;
};

struct PointValue {
  double value = 0.0;
  Point gradient = Point::Zero();
  double laplacian = 0.0;
};

/// Coefficient vector bound to a space.
class FeFunction {
 public:
  explicit FeFunction(std::shared_ptr<const FeSpace> space);
  FeFunction(std::shared_ptr<const FeSpace> space, Eigen::VectorXd coefficients);

  const FeSpace& space() const { return *space_; }
  const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  Eigen::VectorXd& coefficients() { return coeffs_; }

 private:
  std::shared_ptr<const FeSpace> space_;
  Eigen::VectorXd coeffs_;
};

PointValue eval(const FeFunction& f, int element, const Eigen::Vector3d& bary);

/// Coefficients = u at the dof coordinates.
FeFunction nodal_interpolate(const std::shared_ptr<const FeSpace>& space, const ScalarField& u);

/// Exact embedding of a P1 function into a space of higher order on the same mesh.
FeFunction prolongate(const FeFunction& p1, const std::shared_ptr<const FeSpace>& target);

}  // namespace nitsche
