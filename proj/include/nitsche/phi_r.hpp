#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "nitsche/fespace.hpp"
#include "nitsche/mesh.hpp"
#include "nitsche/problem.hpp"

namespace nitsche {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// meas(F)^{-1} int_F grad f . n over the edges of one patch.
double mean_normal_gradient(const FeFunction& f, const BoundaryPatch& patch);
/// Same for a smooth function.
double mean_normal_gradient(const VectorField& grad, const Mesh& mesh, const BoundaryPatch& patch);

/// P1 coefficients of the bump: 1 at inner nodes of F_j, 0 at every vertex
/// of a corner element and everywhere else.
Eigen::VectorXd patch_bump(const FeSpace& p1, const BoundaryPatch& patch);

struct PhiR {
  FeFunction function;          // phi_r in V_h^1
  std::vector<double> targets;  // r_j
  std::vector<double> xi;       // mean normal gradient of each bump
  double c_xi = 0.0;            // min_j xi_j h
};

/// phi_r = sum_j r_j xi_j^{-1} bump_j. Throws GeometryError when some
/// xi_j < 1e-12.
PhiR build_phi_r(const PatchSet& patches, const std::vector<double>& r, const std::shared_ptr<const FeSpace>& p1);

/// ||phi_r||_{1,h} / (sum_j h r_j^2 meas(F_j))^{1/2}, h the mesh size.
double phi_r_stability_ratio(const PhiR& phi, const PatchSet& patches);

}  // namespace nitsche
