#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nitsche/experiments.hpp"
#include "nitsche/linalg.hpp"

using namespace nitsche;

namespace {

Point parse_beta(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError("--beta expects FX,FY");
  try {
    const double fx = std::stod(s.substr(0, comma));
    const double fy = std::stod(s.substr(comma + 1));
    return Point(fx, fy);
  } catch (const std::logic_error&) {
    throw ConfigError("--beta expects FX,FY, got '" + s + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalty-free non-symmetric Nitsche finite element experiments"};
  app.require_subcommand(1);

  RunConfig cfg;
  int n = 0;
  std::string mesh = "jittered", bc = "nitsche", stab = "none", solver = "direct", beta, form = "poisson", mesh_file;
  std::vector<double> gammas;
  std::vector<int> ns;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--order", cfg.order, "polynomial order")->check(CLI::IsMember({1, 2}));
    sub->add_option("--n", n, "cells per side");
    sub->add_option("--levels", cfg.levels, "refinement levels, n = 10 * 2^i");
    sub->add_option("--mesh", mesh, "mesh family")->check(CLI::IsMember({"structured", "jittered"}));
    sub->add_option("--jitter", cfg.mesh.jitter, "jitter magnitude as a fraction of h_min");
    sub->add_option("--seed", cfg.mesh.seed, "jitter and probe seed");
    sub->add_option("--mesh-file", mesh_file, "import a mesh in the text format instead of generating one");
    sub->add_option("--gamma", cfg.gamma, "boundary penalty");
    sub->add_option("--eps", cfg.eps, "diffusion");
    sub->add_option("--beta", beta, "velocity FX,FY");
    sub->add_option("--sigma", cfg.sigma, "reaction");
    sub->add_option("--stab", stab, "stabilization")->check(CLI::IsMember({"none", "sd", "cip"}));
    sub->add_option("--gamma-sd", cfg.gamma_sd, "streamline-diffusion parameter");
    sub->add_option("--gamma-cip", cfg.gamma_cip, "interior penalty parameter");
    sub->add_option("--bc", bc, "boundary condition")->check(CLI::IsMember({"nitsche", "nitsche-sym", "strong"}));
    sub->add_option("--solver", solver, "linear solver")->check(CLI::IsMember({"direct", "bicgstab"}));
    sub->add_option("--out", cfg.out, "output directory");
  };

  auto* conv = app.add_subcommand("convergence", "error and rate table against the smooth manufactured solution");
  auto* sweep = app.add_subcommand("penalty-sweep", "errors for a list of boundary penalties on one mesh");
  auto* outflow = app.add_subcommand("outflow", "convection-dominated problem with an outflow layer");
  auto* infsup = app.add_subcommand("infsup", "dense inf-sup constant estimate per mesh");
  auto* verify = app.add_subcommand("verify", "invariant suite, one line per check");
  for (auto* sub : {conv, sweep, outflow, infsup, verify}) common(sub);
  sweep->add_option("--gammas", gammas, "penalties to sweep")->delimiter(',');
  infsup->add_option("--ns", ns, "cells per side for each row")->delimiter(',');
  infsup->add_option("--form", form, "form to probe")->check(CLI::IsMember({"poisson", "convdiff"}));
  infsup->add_flag("--with-sym", cfg.with_sym, "add the symmetric Nitsche column");
  verify->add_option("--edges-per-patch", cfg.edges_per_patch, "boundary edges per patch");
  verify->add_flag("--inject-bad-patch", cfg.inject_bad_patch, "shrink one patch to three edges");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config_error;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    if (sub->count("--n")) cfg.n = n;
    if (sub->count("--mesh-file")) cfg.mesh_file = mesh_file;
    cfg.mesh.kind = parse_mesh_kind(mesh);
    cfg.bc = parse_boundary_mode(bc);
    cfg.stab = parse_stabilization(stab);
    cfg.solver = solver == "direct" ? SolverKind::direct : SolverKind::bicgstab;
    if (!beta.empty())
      cfg.beta = parse_beta(beta);
    else if (cfg.command == "outflow")
      cfg.beta = Point(0.5, 1.0);
    if (cfg.command == "outflow" && !sub->count("--mesh")) cfg.mesh.kind = MeshKind::structured;
    if (cfg.command == "verify" && !sub->count("--mesh")) cfg.mesh.kind = MeshKind::structured;
    if (sweep->count("--gammas")) cfg.gammas = gammas;
    if (infsup->count("--ns")) cfg.ns = ns;
    cfg.form = form == "poisson" ? InfSupForm::poisson_nitsche : InfSupForm::convdiff;
    if (cfg.form == InfSupForm::convdiff && beta.empty()) cfg.beta = Point(0.5, 1.0);
    return run_command(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return exit_solver_failure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_solver_failure;
  }
}
