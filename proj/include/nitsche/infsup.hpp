#pragma once

#include <memory>

#include "nitsche/fespace.hpp"
#include "nitsche/linalg.hpp"
#include "nitsche/problem.hpp"

namespace nitsche {

enum class InfSupForm { poisson_nitsche, convdiff };

/// Gram matrix of ||.||_{1,h} (poisson_nitsche) or ||.||_{1,h,beta} (convdiff).
CsrMatrix norm_gram_matrix(const FeSpace& space, InfSupForm form, const ProblemSpec& p);

struct InfSupResult {
  double c_s = 0.0;
  FeFunction minimizer;  // unit in the form's norm
  int dofs = 0;
};

/// c_s = min_v sup_w a(v, w) / (||v|| ||w||), computed as the square root of
/// the smallest eigenvalue of A^T M^{-1} A x = lambda M x. For
/// poisson_nitsche the boundary mode and penalty come from p; convdiff uses
/// the unstabilized convection-diffusion form.
InfSupResult infsup_constant(InfSupForm form, const std::shared_ptr<const FeSpace>& space, const ProblemSpec& p,
                             int dense_cap = 2000);

}  // namespace nitsche
