#include "nitsche/problem.hpp"

#include <cmath>
#include <numbers>

namespace nitsche {

void ProblemSpec::validate() const {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (!(stabilization.gamma >= 0.0)) throw ConfigError("stabilization parameter must be non-negative");
  if (!f || !g) throw ConfigError("source and boundary data must be set");
}

ExactSolution sine_solution() {
  using std::numbers::pi;
  ExactSolution u;
  u.value = [](const Point& p) { return std::sin(pi * p.x()) * std::sin(2 * pi * p.y()); };
  u.gradient = [](const Point& p) {
    return Point(pi * std::cos(pi * p.x()) * std::sin(2 * pi * p.y()),
                 2 * pi * std::sin(pi * p.x()) * std::cos(2 * pi * p.y()));
  };
  u.laplacian = [](const Point& p) { return -5 * pi * pi * std::sin(pi * p.x()) * std::sin(2 * pi * p.y()); };
  return u;
}

ExactSolution polynomial_solution(int order) {
  ExactSolution u;
  if (order == 1) {
    u.value = [](const Point& p) { return 0.3 + 1.7 * p.x() - 0.9 * p.y(); };
    u.gradient = [](const Point&) { return Point(1.7, -0.9); };
    u.laplacian = [](const Point&) { return 0.0; };
  } else if (order == 2) {
    u.value = [](const Point& p) {
      const double x = p.x(), y = p.y();
      return 0.3 + 1.7 * x - 0.9 * y + 1.1 * x * x - 0.8 * x * y + 2.3 * y * y;
    };
    u.gradient = [](const Point& p) {
      const double x = p.x(), y = p.y();
      return Point(1.7 + 2.2 * x - 0.8 * y, -0.9 - 0.8 * x + 4.6 * y);
    };
    u.laplacian = [](const Point&) { return 2.2 + 4.6; };
  } else {
    throw ConfigError("polynomial_solution: order must be 1 or 2");
  }
  return u;
}

ProblemSpec poisson_problem(const ExactSolution& u, BoundaryMode bc, double gamma) {
  ProblemSpec p;
  auto lap = u.laplacian;
  p.f = [lap](const Point& x) { return -lap(x); };
  p.g = u.value;
  p.bc = bc;
  p.gamma = gamma;
  return p;
}

ProblemSpec manufactured_problem(const ExactSolution& u, double eps, const Point& beta, double sigma,
                                 BoundaryMode bc, double gamma, Stabilization stab) {
  ProblemSpec p;
  p.eps = eps;
  p.beta = beta;
  p.sigma = sigma;
  p.f = [u, eps, beta, sigma](const Point& x) {
    return sigma * u.value(x) + beta.dot(u.gradient(x)) - eps * u.laplacian(x);
  };
  p.g = u.value;
  p.bc = bc;
  p.gamma = gamma;
  p.stabilization = stab;
  return p;
}

std::string_view to_string(BoundaryMode mode) {
  switch (mode) {
    case BoundaryMode::nitsche_nonsym: return "nitsche";
    case BoundaryMode::nitsche_sym: return "nitsche-sym";
    case BoundaryMode::strong: return "strong";
  }
  return "?";
}

std::string_view to_string(StabilizationKind kind) {
  switch (kind) {
    case StabilizationKind::none: return "none";
    case StabilizationKind::sd: return "sd";
    case StabilizationKind::cip: return "cip";
  }
  return "?";
}

BoundaryMode parse_boundary_mode(std::string_view s) {
  if (s == "nitsche" || s == "nitsche_nonsym") return BoundaryMode::nitsche_nonsym;
  if (s == "nitsche-sym" || s == "nitsche_sym") return BoundaryMode::nitsche_sym;
  if (s == "strong") return BoundaryMode::strong;
  throw ConfigError("unknown boundary mode '" + std::string(s) + "'");
}

StabilizationKind parse_stabilization(std::string_view s) {
  if (s == "none") return StabilizationKind::none;
  if (s == "sd") return StabilizationKind::sd;
  if (s == "cip") return StabilizationKind::cip;
  throw ConfigError("unknown stabilization '" + std::string(s) + "'");
}

}  // namespace nitsche
