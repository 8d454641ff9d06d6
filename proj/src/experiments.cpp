#include "nitsche/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "nitsche/field_io.hpp"
#include "nitsche/norms.hpp"
#include "nitsche/quadrature.hpp"
#include "nitsche/verify.hpp"

namespace nitsche {

using json = nlohmann::ordered_json;

Stabilization RunConfig::stabilization() const {
  switch (stab) {
    case StabilizationKind::sd: return {stab, gamma_sd};
    case StabilizationKind::cip: return {stab, gamma_cip};
    case StabilizationKind::none: break;
  }
  return {};
}

void RunConfig::validate() const {
  if (order != 1 && order != 2) throw ConfigError("--order must be 1 or 2");
  if (n && *n < 2) throw ConfigError("--n must be at least 2");
  if (levels < 1) throw ConfigError("--levels must be at least 1");
  if (!(eps > 0.0)) throw ConfigError("--eps must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("--sigma must be non-negative");
  if (!(gamma >= 0.0) || !(gamma_sd >= 0.0) || !(gamma_cip >= 0.0))
    throw ConfigError("penalty and stabilization parameters must be non-negative");
  if (!(mesh.jitter >= 0.0 && mesh.jitter <= 0.25)) throw ConfigError("--jitter must lie in [0, 0.25]");
  if (edges_per_patch < 5) throw ConfigError("--edges-per-patch must be at least 5");
  if (stab == StabilizationKind::sd && sigma != 0.0) throw ConfigError("streamline diffusion requires --sigma 0");
  if (stab != StabilizationKind::none && bc != BoundaryMode::nitsche_nonsym && bc != BoundaryMode::strong)
    throw ConfigError("stabilized runs need --bc nitsche or --bc strong");
  if (stab != StabilizationKind::none && bc == BoundaryMode::strong && command != "outflow")
    throw ConfigError("stabilization with strong boundary conditions is available in outflow only");
  for (double g : gammas)
    if (!(g >= 0.0)) throw ConfigError("--gammas entries must be non-negative");
  for (int m : ns)
    if (m < 2) throw ConfigError("--ns entries must be at least 2");
  if (mesh_file && command == "convergence") throw ConfigError("convergence builds its own mesh family; drop --mesh-file");
}

std::shared_ptr<const Mesh> run_mesh(const RunConfig& cfg, int n) {
  if (cfg.mesh_file) {
    std::ifstream is(*cfg.mesh_file);
    if (!is) throw ConfigError("cannot open mesh file " + cfg.mesh_file->string());
    try {
      return std::make_shared<const Mesh>(read_mesh(is));
    } catch (const MeshError& e) {
      throw ConfigError(cfg.mesh_file->string() + ": " + e.what());
    }
  }
  return make_mesh(n, cfg.mesh);
}

namespace {

int local_edge_of(const Mesh& mesh, int k, int e) {
  for (int i = 0; i < 3; ++i)
    if (mesh.triangle_edge(k, i) == e) return i;
  return -1;
}

Eigen::Vector3d edge_point_from(const Mesh& mesh, int k, int e, int from, double s) {
  const int le = local_edge_of(mesh, k, e);
  const int start = mesh.triangles()[k].v[(le + 1) % 3];
  return FeSpace::edge_point(le, start == from ? s : 1.0 - s);
}

double distance_to_segment(const Point& x, const Point& a, const Point& b) {
  const Point d = b - a;
  const double t = std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (x - (a + t * d)).norm();
}

}  // namespace

double outflow_oscillation(const FeFunction& u, const Point& beta, double strip) {
  const Mesh& mesh = u.space().mesh();
  std::vector<const BoundaryEdge*> outflow;
  for (const BoundaryEdge& be : mesh.boundary_edges())
    if (beta.dot(be.normal) > 0.0) outflow.push_back(&be);
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::edge, u.space().order());
  double jump_sum = 0.0, length = 0.0;
  for (int e = 0; e < static_cast<int>(mesh.edges().size()); ++e) {
    const Edge& edge = mesh.edges()[e];
    if (edge.is_boundary()) continue;
    const Point& a = mesh.vertices()[edge.v[0]];
    const Point& b = mesh.vertices()[edge.v[1]];
    const Point mid = 0.5 * (a + b);
    double dist = std::numeric_limits<double>::infinity();
    for (const BoundaryEdge* be : outflow)
      dist = std::min(dist, distance_to_segment(mid, mesh.vertices()[be->v[0]], mesh.vertices()[be->v[1]]));
    if (dist > strip) continue;
    const Point t = b - a;
    const double len = t.norm();
    const Point n(t.y() / len, -t.x() / len);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double s = rule.points[q](1);
      const Point g0 = eval(u, edge.tri[0], edge_point_from(mesh, edge.tri[0], e, edge.v[0], s)).gradient;
      const Point g1 = eval(u, edge.tri[1], edge_point_from(mesh, edge.tri[1], e, edge.v[0], s)).gradient;
      jump_sum += len * rule.weights[q] * std::abs((g0 - g1).dot(n));
    }
    length += len;
  }
  return length > 0.0 ? jump_sum / length : 0.0;
}

OutflowReport outflow_report(const FeFunction& u, const Point& beta, double strip) {
  return {u.coefficients().maxCoeff(), u.coefficients().minCoeff(), outflow_oscillation(u, beta, strip)};
}

ProblemSpec outflow_problem(const RunConfig& cfg) {
  ProblemSpec p;
  p.eps = cfg.eps;
  p.beta = cfg.beta;
  p.sigma = cfg.sigma;
  p.f = [](const Point&) { return 1.0; };
  p.g = [](const Point&) { return 0.0; };
  p.bc = cfg.bc;
  p.gamma = cfg.gamma;
  p.stabilization = cfg.stabilization();
  return p;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + tmp.string());
    os << content;
    if (!os) throw ConfigError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string fixed_name(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

json config_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["order"] = cfg.order;
  j["n"] = cfg.n ? json(*cfg.n) : json(nullptr);
  j["levels"] = cfg.levels;
  j["mesh"] = to_string(cfg.mesh.kind);
  j["jitter"] = cfg.mesh.jitter;
  j["seed"] = cfg.mesh.seed;
  j["mesh_file"] = cfg.mesh_file ? json(cfg.mesh_file->string()) : json(nullptr);
  j["bc"] = to_string(cfg.bc);
  j["gamma"] = cfg.gamma;
  j["eps"] = cfg.eps;
  j["beta"] = {cfg.beta.x(), cfg.beta.y()};
  j["sigma"] = cfg.sigma;
  j["stab"] = to_string(cfg.stab);
  j["gamma_sd"] = cfg.gamma_sd;
  j["gamma_cip"] = cfg.gamma_cip;
  j["solver"] = cfg.solver == SolverKind::direct ? "direct" : "bicgstab";
  j["out"] = cfg.out.string();
  return j;
}

json stats_json(const Mesh& mesh) {
  const MeshStats& s = mesh.stats();
  return {{"h", s.h},
          {"h_min", s.h_min},
          {"shape_regularity", s.shape_regularity},
          {"vertices", s.vertices},
          {"triangles", s.triangles},
          {"edges", s.edges},
          {"boundary_edges", s.boundary_edges},
          {"corner_elements", s.corner_elements}};
}

void write_manifest(const RunConfig& cfg, json results, json meshes, double seconds) {
  json m;
  m["config"] = config_json(cfg);
  m["meshes"] = std::move(meshes);
  m["results"] = std::move(results);
  m["timings"] = {{"total_seconds", seconds}};
  write_atomic(cfg.out / ("manifest_" + cfg.command + ".json"), m.dump(2) + "\n");
}

ProblemSpec smooth_problem(const RunConfig& cfg, BoundaryMode bc) {
  return manufactured_problem(sine_solution(), cfg.eps, cfg.beta, cfg.sigma, bc, cfg.gamma, cfg.stabilization());
}

std::string cell(const ConvergenceTable& t, std::size_t i, bool l2) {
  if (i >= t.rows.size()) return ",";
  const ConvergenceRow& r = t.rows[i];
  const auto& rate = l2 ? r.l2_rate : r.h1_rate;
  char buf[16] = "";
  if (rate) std::snprintf(buf, sizeof buf, "%.2f", *rate);
  return sci3(l2 ? r.l2 : r.h1) + "," + buf;
}

std::string table_cell(const ConvergenceRow& r, bool l2) {
  const auto& rate = l2 ? r.l2_rate : r.h1_rate;
  char buf[48];
  if (rate)
    std::snprintf(buf, sizeof buf, "%.1E (%.1f)", l2 ? r.l2 : r.h1, *rate);
  else
    std::snprintf(buf, sizeof buf, "%.1E (---)", l2 ? r.l2 : r.h1);
  return buf;
}

json table_json(const ConvergenceTable& t) {
  json rows = json::array();
  for (const ConvergenceRow& r : t.rows)
    rows.push_back({{"n", r.n},
                    {"h", r.h},
                    {"dofs", r.dofs},
                    {"l2", r.l2},
                    {"l2_rate", r.l2_rate ? json(*r.l2_rate) : json(nullptr)},
                    {"h1", r.h1},
                    {"h1_rate", r.h1_rate ? json(*r.h1_rate) : json(nullptr)}});
  return {{"rows", rows}, {"exact", t.exact}, {"partial", t.partial}, {"failure", t.failure}};
}

}  // namespace

int cmd_convergence(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto t0 = Clock::now();
  const int base_n = cfg.n.value_or(10);
  const ExactSolution u = sine_solution();
  const std::string k = "k" + std::to_string(cfg.order);
  const std::string bc_name(to_string(cfg.bc));

  const ConvergenceTable weak = convergence_study(smooth_problem(cfg, cfg.bc), u, cfg.order, cfg.mesh, cfg.levels,
                                                  cfg.solver, base_n);
  std::ostringstream csv;
  write_csv(weak, csv);
  write_atomic(cfg.out / ("convergence_" + k + "_" + bc_name + ".csv"), csv.str());
  json results;
  results[bc_name] = table_json(weak);

  ConvergenceTable strong;
  const bool compare = cfg.bc != BoundaryMode::strong;
  if (compare) {
    ProblemSpec ps = smooth_problem(cfg, BoundaryMode::strong);
    if (ps.stabilization.kind != StabilizationKind::none) ps.stabilization = {};
    strong = convergence_study(ps, u, cfg.order, cfg.mesh, cfg.levels, cfg.solver, base_n);
    std::ostringstream s;
    write_csv(strong, s);
    write_atomic(cfg.out / ("convergence_" + k + "_strong.csv"), s.str());
    results["strong"] = table_json(strong);

    std::ostringstream side;
    for (const auto& [key, value] : weak.metadata) side << "# " << key << '=' << value << '\n';
    side << "n,h,dofs," << bc_name << "_h1," << bc_name << "_h1_rate,strong_h1,strong_h1_rate," << bc_name << "_l2,"
         << bc_name << "_l2_rate,strong_l2,strong_l2_rate\n";
    for (std::size_t i = 0; i < weak.rows.size(); ++i) {
      const ConvergenceRow& r = weak.rows[i];
      side << r.n << ',' << sci3(r.h) << ',' << r.dofs << ',' << cell(weak, i, false) << ',' << cell(strong, i, false)
           << ',' << cell(weak, i, true) << ',' << cell(strong, i, true) << '\n';
    }
    write_atomic(cfg.out / ("convergence_" + k + ".csv"), side.str());
  }

  log << "N    " << bc_name << " H1        strong H1        " << bc_name << " L2        strong L2\n";
  for (std::size_t i = 0; i < weak.rows.size(); ++i) {
    log << std::left << std::setw(5) << weak.rows[i].n << table_cell(weak.rows[i], false) << "    "
        << (compare && i < strong.rows.size() ? table_cell(strong.rows[i], false) : "-") << "    "
        << table_cell(weak.rows[i], true) << "    "
        << (compare && i < strong.rows.size() ? table_cell(strong.rows[i], true) : "-") << '\n';
  }
  write_manifest(cfg, results, json::array(), seconds_since(t0));
  if (weak.partial || strong.partial) {
    log << "solver failure: " << (weak.partial ? weak.failure : strong.failure) << '\n';
    return exit_solver_failure;
  }
  return exit_ok;
}

int cmd_penalty_sweep(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.bc == BoundaryMode::strong) throw ConfigError("penalty-sweep needs a weak boundary mode");
  const auto t0 = Clock::now();
  const int n = cfg.n.value_or(cfg.order == 1 ? 80 : 40);
  auto space = std::make_shared<const FeSpace>(run_mesh(cfg, n), cfg.order);
  const ExactSolution u = sine_solution();

  std::ostringstream csv;
  csv << "# order=" << cfg.order << "\n# n=" << n << "\n# bc=" << to_string(cfg.bc) << "\n# mesh="
      << (cfg.mesh_file ? cfg.mesh_file->filename().string() : std::string(to_string(cfg.mesh.kind))) << "\n# seed="
      << cfg.mesh.seed << "\ngamma,l2_err,h1_err\n";
  json rows = json::array();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double g : cfg.gammas) {
    RunConfig c = cfg;
    c.gamma = g;
    const FeFunction uh = solve(assemble(space, smooth_problem(c, cfg.bc)), cfg.solver);
    const ErrorPair e = errors(u, uh);
    csv << fixed_name(g) << ',' << sci3(e.l2) << ',' << sci3(e.h1) << '\n';
    rows.push_back({{"gamma", g}, {"l2", e.l2}, {"h1", e.h1}});
    lo = std::min(lo, e.l2);
    hi = std::max(hi, e.l2);
    log << "gamma=" << std::setw(6) << std::left << fixed_name(g) << " L2 " << sci3(e.l2) << "  H1 " << sci3(e.h1)
        << '\n';
  }
  write_atomic(cfg.out / ("penalty_sweep_k" + std::to_string(cfg.order) + ".csv"), csv.str());
  json results{{"rows", rows}};
  if (cfg.gammas.size() > 1) {
    results["l2_max_over_min"] = hi / lo;
    log << "L2 max/min = " << std::setprecision(3) << hi / lo << '\n';
  }
  write_manifest(cfg, results, json::array({stats_json(space->mesh())}), seconds_since(t0));
  return exit_ok;
}

int cmd_outflow(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.bc == BoundaryMode::nitsche_sym) throw ConfigError("outflow supports --bc nitsche or --bc strong");
  const auto t0 = Clock::now();
  const int n = cfg.n.value_or(80);
  auto space = std::make_shared<const FeSpace>(run_mesh(cfg, n), cfg.order);
  const ProblemSpec p = outflow_problem(cfg);
  const FeFunction uh = solve(assemble(space, p), cfg.solver);
  const OutflowReport rep = outflow_report(uh, p.beta);

  const std::string stem = "outflow_k" + std::to_string(cfg.order) + "_" + std::string(to_string(cfg.bc)) + "_" +
                           std::string(to_string(cfg.stab)) + "_eps" + fixed_name(cfg.eps);
  std::ostringstream vtk;
  write_vtk(uh, vtk, "u");
  write_atomic(cfg.out / (stem + ".vtk"), vtk.str());

  json results{{"max", rep.max_value}, {"min", rep.min_value}, {"oscillation", rep.oscillation}, {"vtk", stem + ".vtk"}};
  if (cfg.stab == StabilizationKind::sd) {
    const SdReport sd = sd_report(*space, p);
    results["sd"] = {{"max_peclet", sd.max_peclet},
                     {"stabilized_elements", sd.stabilized_elements},
                     {"inverse_constant", sd.inverse_constant},
                     {"gamma_sd_bound", std::isinf(sd.gamma_bound) ? json("inf") : json(sd.gamma_bound)}};
    log << "SD: max Pe_K " << sd.max_peclet << ", " << sd.stabilized_elements << " stabilized elements, gamma_SD bound "
        << sd.gamma_bound << '\n';
  }
  log << "max(u_h) = " << rep.max_value << "\nmin(u_h) = " << rep.min_value << "\noscillation = " << rep.oscillation
      << '\n';
  write_manifest(cfg, results, json::array({stats_json(space->mesh())}), seconds_since(t0));
  return exit_ok;
}

int cmd_infsup(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  constexpr int kDenseCap = 2000;
  const auto t0 = Clock::now();
  const int dofs_per_n = cfg.order == 1 ? 1 : 2;
  for (int n : cfg.ns) {
    const long dofs = static_cast<long>(dofs_per_n * n + 1) * (dofs_per_n * n + 1);
    if (dofs > kDenseCap)
      throw ConfigError("infsup: n=" + std::to_string(n) + " gives " + std::to_string(dofs) +
                        " dofs, above the dense cap of " + std::to_string(kDenseCap) + "; use n <= " +
                        std::to_string(static_cast<int>(std::sqrt(kDenseCap) - 1) / dofs_per_n));
  }
  ProblemSpec p;
  p.eps = cfg.eps;
  p.beta = cfg.beta;
  p.sigma = cfg.sigma;
  p.bc = cfg.bc == BoundaryMode::strong ? BoundaryMode::nitsche_nonsym : cfg.bc;
  p.gamma = cfg.gamma;

  std::ostringstream csv;
  csv << "# form=" << (cfg.form == InfSupForm::poisson_nitsche ? "poisson_nitsche" : "convdiff") << "\n# bc="
      << to_string(p.bc) << "\n# gamma=" << fixed_name(p.gamma) << "\n# order=" << cfg.order
      << "\nn,h,dofs,c_s" << (cfg.with_sym ? ",c_s_sym" : "") << '\n';
  json rows = json::array(), meshes = json::array();
  for (int n : cfg.ns) {
    auto space = std::make_shared<const FeSpace>(run_mesh(cfg, n), cfg.order);
    const InfSupResult r = infsup_constant(cfg.form, space, p, kDenseCap);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", r.c_s);
    csv << n << ',' << sci3(space->mesh().stats().h) << ',' << r.dofs << ',' << buf;
    json row{{"n", n}, {"dofs", r.dofs}, {"c_s", r.c_s}};
    log << "n=" << n << " dofs=" << r.dofs << " c_s=" << buf;
    if (cfg.with_sym) {
      ProblemSpec ps = p;
      ps.bc = BoundaryMode::nitsche_sym;
      const InfSupResult rs = infsup_constant(InfSupForm::poisson_nitsche, space, ps, kDenseCap);
      std::snprintf(buf, sizeof buf, "%.6e", rs.c_s);
      csv << ',' << buf;
      row["c_s_sym"] = rs.c_s;
      log << " c_s_sym=" << buf;
    }
    csv << '\n';
    log << '\n';
    rows.push_back(row);
    meshes.push_back(stats_json(space->mesh()));
  }
  write_atomic(cfg.out / "infsup.csv", csv.str());
  write_manifest(cfg, {{"rows", rows}}, meshes, seconds_since(t0));
  return exit_ok;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto t0 = Clock::now();
  const std::vector<CheckResult> checks = run_verify_suite(cfg);
  bool ok = true;
  json results = json::array();
  for (const CheckResult& c : checks) {
    log << format_check(c) << '\n';
    ok = ok && c.status != CheckStatus::fail;
    results.push_back({{"name", c.name},
                       {"status", c.status == CheckStatus::pass ? "pass" : c.status == CheckStatus::fail ? "fail" : "skip"},
                       {"detail", c.detail}});
  }
  write_manifest(cfg, results, json::array(), seconds_since(t0));
  return ok ? exit_ok : exit_check_failed;
}

int run_command(const RunConfig& cfg, std::ostream& log) {
  if (cfg.command == "convergence") return cmd_convergence(cfg, log);
  if (cfg.command == "penalty-sweep") return cmd_penalty_sweep(cfg, log);
  if (cfg.command == "outflow") return cmd_outflow(cfg, log);
  if (cfg.command == "infsup") return cmd_infsup(cfg, log);
  if (cfg.command == "verify") return cmd_verify(cfg, log);
  throw ConfigError("unknown command '" + cfg.command + "'");
}

}  // namespace nitsche
