#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "nitsche/fespace.hpp"

namespace nitsche {

enum class BoundaryMode { nitsche_nonsym, nitsche_sym, strong };
enum class StabilizationKind { none, sd, cip };

struct Stabilization {
  StabilizationKind kind = StabilizationKind::none;
  double gamma = 0.0;  // gamma_SD or gamma_CIP
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// sigma u + beta . grad u - eps Laplace u = f in the unit square, u = g on
/// the boundary. Poisson is eps = 1, beta = 0, sigma = 0.
struct ProblemSpec {
  double eps = 1.0;
  Point beta = Point::Zero();
  double sigma = 0.0;
  ScalarField f = [](const Point&) { return 0.0; };
  ScalarField g = [](const Point&) { return 0.0; };
  BoundaryMode bc = BoundaryMode::nitsche_nonsym;
  double gamma = 0.0;  // boundary penalty
  Stabilization stabilization;

  bool has_convection() const { return beta.squaredNorm() > 0.0 || sigma != 0.0; }
  /// Throws ConfigError on eps <= 0, negative sigma or negative parameters.
  void validate() const;
};

/// Smooth exact solution with derivatives, for manufactured problems.
struct ExactSolution {
  ScalarField value;
  VectorField gradient;
  ScalarField laplacian;
};

/// u = sin(pi x) sin(2 pi y).
ExactSolution sine_solution();

/// Global polynomial of degree `order` (1 or 2) with generic coefficients.
ExactSolution polynomial_solution(int order);

/// Poisson problem with f = -Laplace u and g = u.
ProblemSpec poisson_problem(const ExactSolution& u, BoundaryMode bc, double gamma = 0.0);

/// f = sigma u + beta . grad u - eps Laplace u, g = u.
ProblemSpec manufactured_problem(const ExactSolution& u, double eps, const Point& beta, double sigma,
                                 BoundaryMode bc, double gamma = 0.0, Stabilization stab = {});

std::string_view to_string(BoundaryMode mode);
std::string_view to_string(StabilizationKind kind);
BoundaryMode parse_boundary_mode(std::string_view s);
StabilizationKind parse_stabilization(std::string_view s);

}  // namespace nitsche
