#pragma once

#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "nitsche/fespace.hpp"
#include "nitsche/linalg.hpp"
#include "nitsche/problem.hpp"

namespace nitsche {

/// matrix(i, j) = form(phi_j, phi_i): rows are test functions.
struct AssembledSystem {
  CsrMatrix matrix;
  Eigen::VectorXd rhs;
  std::shared_ptr<const FeSpace> space;
  ProblemSpec problem;
};

// ---- individual terms ------------------------------------------------------

CsrMatrix stiffness_matrix(const FeSpace& space);
CsrMatrix mass_matrix(const FeSpace& space);
/// (beta . grad u, v)
CsrMatrix convection_matrix(const FeSpace& space, const Point& beta);
/// -<grad u . n, v> on the boundary.
CsrMatrix nitsche_flux_matrix(const FeSpace& space);
/// +<u, grad v . n> on the boundary.
CsrMatrix nitsche_adjoint_matrix(const FeSpace& space);
/// sum_K <gamma h_K^{-1} u, v> over boundary faces of K.
CsrMatrix boundary_penalty_matrix(const FeSpace& space, double gamma);
/// -<(beta . n) u, v> over inflow edges (beta . n < 0).
CsrMatrix inflow_matrix(const FeSpace& space, const Point& beta);

/// sum over boundary edges of weight(edge, h_K) <u, v>_edge.
using EdgeWeight = std::function<double(const BoundaryEdge&, double h_K)>;
CsrMatrix boundary_mass_matrix(const FeSpace& space, const EdgeWeight& weight);

/// Per-element streamline parameter: gamma_SD h_K / |beta| where the local
/// Peclet number |beta| h_K / eps exceeds one, zero elsewhere.
double sd_delta(double h_k, const ProblemSpec& p);
/// sum_K delta_K [(beta . grad u, beta . grad v)_K - (eps Laplace u, beta . grad v)_K]
CsrMatrix streamline_matrix(const FeSpace& space, const ProblemSpec& p);

enum class EdgeOrientation { low_to_high, high_to_low };
/// J_h over interior edges, each visited once. With t the unit tangent
/// between the edge's end vertices (ordered by global index as requested),
/// n_F = (t_y, -t_x) and the jump is grad u from Edge::tri[0] minus grad u
/// from Edge::tri[1].
CsrMatrix cip_matrix(const FeSpace& space, const Point& beta, double gamma_cip,
                     EdgeOrientation orientation = EdgeOrientation::low_to_high);

Eigen::VectorXd load_vector(const FeSpace& space, const ScalarField& f);

// ---- full systems ----------------------------------------------------------

/// eps * [a(u,v) - <grad u.n, v> +/- <u, grad v.n> + penalty], right-hand
/// side (f, v) +/- eps <g, grad v.n> + eps gamma h^{-1} <g, v>. The sign of
/// the adjoint term is + for nitsche_nonsym and - for nitsche_sym.
AssembledSystem assemble_poisson_nitsche(std::shared_ptr<const FeSpace> space, const ProblemSpec& p);

/// Volume form of the problem (including any stabilization) with boundary
/// dofs eliminated: identity rows, known values lifted to the right-hand
/// side.
AssembledSystem assemble_strong(std::shared_ptr<const FeSpace> space, const ProblemSpec& p);

/// sigma (u,v) + (beta.grad u, v) - <beta.n u, v>_in + eps a_h(u, v).
AssembledSystem assemble_convdiff(std::shared_ptr<const FeSpace> space, const ProblemSpec& p);

/// Streamline-diffusion stabilized convection-diffusion (sigma = 0).
AssembledSystem assemble_sd(std::shared_ptr<const FeSpace> space, const ProblemSpec& p);

/// Convection-diffusion plus the gradient-jump penalty J_h.
AssembledSystem assemble_cip(std::shared_ptr<const FeSpace> space, const ProblemSpec& p);

/// Dispatches on bc mode, presence of convection and stabilization.
AssembledSystem assemble(std::shared_ptr<const FeSpace> space, const ProblemSpec& p);

struct SdReport {
  double max_peclet = 0.0;
  int stabilized_elements = 0;
  double inverse_constant = 0.0;  // C_I in ||Laplace v||_K <= C_I h_K^{-1} ||grad v||_K
  double gamma_bound = 0.0;       // 1 / C_I^2 (infinite for P1)
};

SdReport sd_report(const FeSpace& space, const ProblemSpec& p);

enum class SolverKind { direct, bicgstab };

/// Throws SolverError when the chosen solver fails (BiCGSTAB reports
/// breakdown and non-convergence as Kind::breakdown / Kind::inaccurate).
FeFunction solve(const AssembledSystem& sys, SolverKind solver = SolverKind::direct);

}  // namespace nitsche
