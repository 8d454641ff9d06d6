#pragma once

#include <cstdint>
#include <vector>

#include "nitsche/fespace.hpp"
#include "nitsche/norms.hpp"
#include "nitsche/problem.hpp"

namespace nitsche {

/// a_h(u, v) for a sampled u, with the boundary mode and penalty of p.
double nitsche_form(const Sampler& u, const FeFunction& v, const ProblemSpec& p);

/// Seeded random coefficient vectors, uniform in [-1, 1].
std::vector<FeFunction> random_probes(const std::shared_ptr<const FeSpace>& space, int count, std::uint64_t seed);

/// max over probes of |a_h(u, v)| / (||u||_* ||v||_{1,h}). Throws
/// std::invalid_argument on a probe of zero norm.
double continuity_ratio(const Sampler& u, const std::vector<FeFunction>& probes, const ProblemSpec& p);

}  // namespace nitsche
