#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "nitsche/fespace.hpp"
#include "nitsche/mesh.hpp"
#include "nitsche/phi_r.hpp"
#include "nitsche/problem.hpp"

namespace nitsche {

/// Nodal interpolant corrected by phi_r so that the mean normal gradient on
/// every patch matches that of u.
struct PiPartial {
  FeFunction function;
  PhiR correction;
  std::vector<double> residuals;  // |int_{F_j} grad(pi u - u) . n|
};

PiPartial build_pi_partial(const ExactSolution& u, const std::shared_ptr<const FeSpace>& space,
                           const PatchSet& patches);

/// L2 projection onto V_h.
FeFunction l2_projection(const ScalarField& u, const std::shared_ptr<const FeSpace>& space);

/// Boundary patch grown by every element holding a node that connects to
/// two nodes of the closed face.
struct CipPatch {
  std::vector<int> triangles;
  std::vector<int> interior_nodes;  // support of w_I
  std::vector<int> face_nodes;      // support of w_F
  double area = 0.0;
};

std::vector<CipPatch> build_cip_patches(const Mesh& mesh, const PatchSet& patches);

struct CipPatchSolve {
  Eigen::Matrix2d system;  // rows: integral over the patch, mean normal gradient over F
  double a = 0.0;          // coefficient of w_I
  double b = 0.0;          // coefficient of w_F
  double target = 0.0;     // r_i
  bool sign_pattern = false;
  double gradient_residual = 0.0;  // |mean grad phi_CIP . n - r_i| over F_i
  double mean_residual = 0.0;      // |int_{P_i} phi_i| / meas(P_i)
};

struct PiCip {
  FeFunction function;
  FeFunction projection;
  std::vector<CipPatch> patches;
  std::vector<CipPatchSolve> solves;
};

/// P1 only. Throws GeometryError when a patch system is numerically singular.
PiCip build_pi_cip(const ExactSolution& u, const std::shared_ptr<const FeSpace>& p1, const PatchSet& patches);

}  // namespace nitsche
