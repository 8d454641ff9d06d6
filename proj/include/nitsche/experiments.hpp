#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nitsche/assembly.hpp"
#include "nitsche/convergence.hpp"
#include "nitsche/infsup.hpp"
#include "nitsche/problem.hpp"

namespace nitsche {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_config_error = 2, exit_solver_failure = 3 };

struct RunConfig {
  std::string command;
  int order = 1;
  std::optional<int> n;
  int levels = 4;
  MeshSpec mesh{MeshKind::jittered, 0.2, 1};
  std::optional<std::filesystem::path> mesh_file;
  BoundaryMode bc = BoundaryMode::nitsche_nonsym;
  double gamma = 0.0;
  double eps = 1.0;
  Point beta = Point::Zero();
  double sigma = 0.0;
  StabilizationKind stab = StabilizationKind::none;
  double gamma_sd = 0.2;
  double gamma_cip = 0.005;
  SolverKind solver = SolverKind::direct;
  std::filesystem::path out = ".";

  std::vector<double> gammas{0.0, 10.0, 20.0, 40.0, 80.0};
  std::vector<int> ns{8, 12, 16};
  InfSupForm form = InfSupForm::poisson_nitsche;
  bool with_sym = false;
  int edges_per_patch = 5;
  bool inject_bad_patch = false;

  Stabilization stabilization() const;
  /// Throws ConfigError on inconsistent combinations.
  void validate() const;
};

/// Mesh for one run: the imported file if given, otherwise n cells per side
/// of the configured family.
std::shared_ptr<const Mesh> run_mesh(const RunConfig& cfg, int n);

struct OutflowReport {
  double max_value = 0.0;
  double min_value = 0.0;
  double oscillation = 0.0;
};

/// Mean |[grad u . n_F]| per unit length over interior edges whose midpoint
/// lies within `strip` of the outflow boundary (beta . n > 0).
double outflow_oscillation(const FeFunction& u, const Point& beta, double strip = 0.1);
OutflowReport outflow_report(const FeFunction& u, const Point& beta, double strip = 0.1);

/// f = 1, g = 0 on the unit square with the configured eps, beta, sigma,
/// boundary mode and stabilization.
ProblemSpec outflow_problem(const RunConfig& cfg);

/// Each command writes its files under cfg.out, a JSON manifest, and a
/// human-readable summary to `log`; the return value is an ExitCode.
int cmd_convergence(const RunConfig& cfg, std::ostream& log);
int cmd_penalty_sweep(const RunConfig& cfg, std::ostream& log);
int cmd_outflow(const RunConfig& cfg, std::ostream& log);
int cmd_infsup(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);

int run_command(const RunConfig& cfg, std::ostream& log);

}  // namespace nitsche
