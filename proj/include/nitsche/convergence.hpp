#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nitsche/assembly.hpp"
#include "nitsche/mesh.hpp"
#include "nitsche/problem.hpp"

namespace nitsche {

enum class MeshKind { structured, jittered };

struct MeshSpec {
  MeshKind kind = MeshKind::structured;
  double jitter = 0.2;  // fraction of h_min, jittered meshes only
  std::uint64_t seed = 1;
};

std::string_view to_string(MeshKind kind);
MeshKind parse_mesh_kind(std::string_view s);

std::shared_ptr<const Mesh> make_mesh(int n_per_side, const MeshSpec& spec);

/// log(e_coarse / e_fine) / log(h_coarse / h_fine).
double observed_rate(double e_coarse, double e_fine, double h_coarse, double h_fine);

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  int dofs = 0;
  double l2 = 0.0;
  std::optional<double> l2_rate;
  double h1 = 0.0;  // H1 seminorm error
  std::optional<double> h1_rate;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::map<std::string, std::string> metadata;
  bool exact = false;    // every error below 1e-9: rates carry no information
  bool partial = false;  // a level failed; `failure` says which
  std::string failure;
};

/// Solves on n = base_n * 2^i, i < levels, and measures L2 and H1-seminorm
/// errors against u.
ConvergenceTable convergence_study(const ProblemSpec& p, const ExactSolution& u, int order, const MeshSpec& mesh,
                                   int levels, SolverKind solver = SolverKind::direct, int base_n = 10);

/// Columns n,h,dofs,l2_err,l2_rate,h1_err,h1_rate preceded by `# key=value`
/// metadata lines; absent rates are empty fields.
void write_csv(const ConvergenceTable& table, std::ostream& os);

/// Three significant digits in scientific notation, e.g. 8.20E-02.
std::string sci3(double v);

}  // namespace nitsche
