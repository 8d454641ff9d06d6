#pragma once

#include <string>
#include <vector>

#include "nitsche/experiments.hpp"

namespace nitsche {

enum class CheckStatus { pass, fail, skip };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string detail;  // measured residuals or the reason for skipping
};

/// The invariant suite behind `nitsche-fem verify`: quadrature exactness,
/// mesh and patch conditions, the phi_r constraint, both interpolant
/// constructions, the positivity identities and the stabilization checks.
/// Uses cfg.n (default 20), cfg.mesh / cfg.mesh_file, cfg.order,
/// cfg.edges_per_patch, cfg.gamma_sd, cfg.gamma_cip and cfg.inject_bad_patch.
std::vector<CheckResult> run_verify_suite(const RunConfig& cfg);

std::string format_check(const CheckResult& c);

}  // namespace nitsche
