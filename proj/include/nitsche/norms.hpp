#pragma once

#include <functional>
#include <string_view>

#include <Eigen/Dense>

#include "nitsche/fespace.hpp"
#include "nitsche/problem.hpp"

namespace nitsche {

enum class NormKind {
  l2,               // ||v||
  h1_semi,          // ||grad v||
  one_h,            // (||grad v||^2 + ||v||^2_{1/2,h})^{1/2}
  half_h_boundary,  // (sum_K h_K^{-1} ||v||^2_{dK cap boundary})^{1/2}
  one_h_beta,       // (eps ||v||^2_{1,h} + 1/2 || |beta.n|^{1/2} v ||^2_boundary)^{1/2}
  triple_h_delta,   // (||delta^{1/2} beta.grad v||^2 + 1/2 || |beta.n|^{1/2} v ||^2_boundary + eps ||grad v||^2)^{1/2}
  star_poisson,     // ||v||_{1,h} + ||h^{1/2} grad v.n||_boundary
  triple_star,      // SD convergence norm, diagnostic only
};

std::string_view to_string(NormKind kind);

/// Value, gradient and Laplacian of the measured function at a barycentric
/// point of element k.
using Sampler = std::function<PointValue(int k, const Eigen::Vector3d& bary)>;

Sampler sampler(const FeFunction& f);
/// u - u_h.
Sampler error_sampler(const ExactSolution& u, const FeFunction& uh);

/// Squared building blocks of every norm, accumulated in one quadrature pass.
struct NormParts {
  double l2 = 0.0;              // ||v||^2
  double grad = 0.0;            // ||grad v||^2
  double boundary_h = 0.0;      // sum_K h_K^{-1} ||v||^2_{dK cap boundary}
  double boundary_beta = 0.0;   // || |beta.n|^{1/2} v ||^2_boundary
  double normal_flux_h = 0.0;   // sum_K h_K ||grad v.n||^2_{dK cap boundary}
  double streamline = 0.0;      // sum_K delta_K ||beta.grad v||^2_K
  double inverse_delta = 0.0;   // sum_{K: delta_K > 0} delta_K^{-1} ||v||^2_K
  double delta_laplacian = 0.0; // sum_K delta_K eps^2 ||Laplace v||^2_K
};

/// delta_K is taken from the streamline-diffusion rule when p selects SD,
/// and is zero otherwise.
NormParts norm_parts(const Sampler& v, const FeSpace& space, const ProblemSpec& p = {});
double combine(const NormParts& parts, NormKind kind, const ProblemSpec& p = {});

/// Throws ConfigError when `kind` needs a velocity and p.beta is zero.
double norm(const FeFunction& f, NormKind kind, const ProblemSpec& p = {});
double error_norm(const ExactSolution& u, const FeFunction& uh, NormKind kind, const ProblemSpec& p = {});

struct ErrorPair {
  double l2 = 0.0;
  double h1 = 0.0;  // H1 seminorm
};
ErrorPair errors(const ExactSolution& u, const FeFunction& uh);

}  // namespace nitsche
