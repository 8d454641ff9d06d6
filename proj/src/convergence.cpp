#include "nitsche/convergence.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "nitsche/fespace.hpp"
#include "nitsche/linalg.hpp"
#include "nitsche/norms.hpp"

namespace nitsche {

std::string_view to_string(MeshKind kind) { return kind == MeshKind::structured ? "structured" : "jittered"; }

MeshKind parse_mesh_kind(std::string_view s) {
  if (s == "structured") return MeshKind::structured;
  if (s == "jittered") return MeshKind::jittered;
  throw ConfigError("unknown mesh kind '" + std::string(s) + "'");
}

std::shared_ptr<const Mesh> make_mesh(int n_per_side, const MeshSpec& spec) {
  Mesh base = build_structured(n_per_side);
  if (spec.kind == MeshKind::structured || spec.jitter == 0.0) return std::make_shared<const Mesh>(std::move(base));
  return std::make_shared<const Mesh>(jitter(base, spec.jitter, spec.seed));
}

double observed_rate(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

ConvergenceTable convergence_study(const ProblemSpec& p, const ExactSolution& u, int order, const MeshSpec& mesh,
                                   int levels, SolverKind solver, int base_n) {
  if (levels < 1) throw ConfigError("convergence: levels must be at least 1");
  if (order != 1 && order != 2) throw ConfigError("convergence: order must be 1 or 2");
  ConvergenceTable table;
  table.metadata = {{"order", std::to_string(order)},
                    {"bc", std::string(to_string(p.bc))},
                    {"gamma", sci3(p.gamma)},
                    {"stabilization", std::string(to_string(p.stabilization.kind))},
                    {"stabilization_gamma", sci3(p.stabilization.gamma)},
                    {"mesh", std::string(to_string(mesh.kind))},
                    {"seed", std::to_string(mesh.seed)},
                    {"jitter", mesh.kind == MeshKind::jittered ? sci3(mesh.jitter) : "0"}};
  for (int i = 0; i < levels; ++i) {
    const int n = base_n << i;
    try {
      auto space = std::make_shared<const FeSpace>(make_mesh(n, mesh), order);
      const FeFunction uh = solve(assemble(space, p), solver);
      const ErrorPair e = errors(u, uh);
      ConvergenceRow row{n, space->mesh().stats().h, space->num_dofs(), e.l2, {}, e.h1, {}};
      if (!table.rows.empty()) {
        const ConvergenceRow& prev = table.rows.back();
        row.l2_rate = observed_rate(prev.l2, row.l2, prev.h, row.h);
        row.h1_rate = observed_rate(prev.h1, row.h1, prev.h, row.h);
      }
      table.rows.push_back(row);
    } catch (const SolverError& err) {
      table.partial = true;
      table.failure = "level n=" + std::to_string(n) + ": " + err.what();
      break;
    }
  }
  table.exact = !table.rows.empty();
  for (const ConvergenceRow& r : table.rows)
    if (!(r.l2 <= 1e-9 && r.h1 <= 1e-9)) table.exact = false;
  if (table.exact)
    for (ConvergenceRow& r : table.rows) r.l2_rate = r.h1_rate = std::nullopt;
  return table;
}

std::string sci3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2E", v);
  return buf;
}

namespace {

std::string rate_field(const std::optional<double>& r) {
  if (!r) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *r);
  return buf;
}

}  // namespace

void write_csv(const ConvergenceTable& table, std::ostream& os) {
  for (const auto& [key, value] : table.metadata) os << "# " << key << '=' << value << '\n';
  if (table.exact) os << "# exact=1\n";
  if (table.partial) os << "# partial=" << table.failure << '\n';
  os << "n,h,dofs,l2_err,l2_rate,h1_err,h1_rate\n";
  for (const ConvergenceRow& r : table.rows)
    os << r.n << ',' << sci3(r.h) << ',' << r.dofs << ',' << sci3(r.l2) << ',' << rate_field(r.l2_rate) << ','
       << sci3(r.h1) << ',' << rate_field(r.h1_rate) << '\n';
}

}  // namespace nitsche
