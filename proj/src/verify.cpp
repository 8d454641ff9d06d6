#include "nitsche/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "nitsche/assembly.hpp"
#include "nitsche/continuity.hpp"
#include "nitsche/interpolants.hpp"
#include "nitsche/phi_r.hpp"
#include "nitsche/quadrature.hpp"

namespace nitsche {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

CheckResult bounded(std::string name, double measured, double tol, std::string extra = {}) {
  CheckResult c{std::move(name), measured <= tol ? CheckStatus::pass : CheckStatus::fail,
                "residual=" + num(measured) + " tol=" + num(tol)};
  if (!extra.empty()) c.detail += " " + extra;
  return c;
}

CheckResult flag(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, std::move(detail)};
}

double factorial(int k) { return std::tgamma(k + 1.0); }

double area_quadrature_error() {
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::area, 2);
  double worst = 0.0;
  for (int a = 0; a <= rule.degree; ++a)
    for (int b = 0; a + b <= rule.degree; ++b) {
      double sum = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q)
        sum += rule.weights[q] * std::pow(rule.points[q](1), a) * std::pow(rule.points[q](2), b);
      worst = std::max(worst, std::abs(sum - factorial(a) * factorial(b) / factorial(a + b + 2)));
    }
  return worst;
}

double edge_quadrature_error() {
  const QuadratureRule& rule = quadrature_for(QuadratureDomain::edge, 2);
  double worst = 0.0;
  for (int m = 0; m <= rule.degree; ++m) {
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) sum += rule.weights[q] * std::pow(rule.points[q](1), m);
    worst = std::max(worst, std::abs(sum - 1.0 / (m + 1)));
  }
  return worst;
}

PatchSet inject_short_patch(const Mesh& mesh, PatchSet set) {
  BoundaryPatch& p = set.patches.front();
  p.edges.resize(3);
  p.vertices.resize(4);
  p.interior_vertices.assign(p.vertices.begin() + 1, p.vertices.end() - 1);
  p.measure = 0.0;
  for (int e : p.edges) p.measure += mesh.boundary_edges()[e].length;
  return set;
}

double quad(const CsrMatrix& a, const Eigen::VectorXd& v) { return v.dot(a * v); }

}  // namespace

std::string format_check(const CheckResult& c) {
  const char* tag = c.status == CheckStatus::pass ? "PASS" : c.status == CheckStatus::fail ? "FAIL" : "SKIP";
  return std::string(tag) + "  " + c.name + "  " + c.detail;
}

std::vector<CheckResult> run_verify_suite(const RunConfig& cfg) {
  std::vector<CheckResult> out;
  const int n = cfg.n.value_or(20);
  const auto mesh = run_mesh(cfg, n);
  auto p1 = std::make_shared<const FeSpace>(mesh, 1);
  auto space = cfg.order == 1 ? p1 : std::make_shared<const FeSpace>(mesh, cfg.order);
  std::mt19937_64 rng(cfg.mesh.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  out.push_back(bounded("quadrature_area_degree6", area_quadrature_error(), 1e-14));
  out.push_back(bounded("quadrature_edge_degree7", edge_quadrature_error(), 1e-15));

  // mesh
  {
    bool ccw = true, symmetric = true;
    const auto& tris = mesh->triangles();
    for (int k = 0; k < static_cast<int>(tris.size()); ++k) {
      ccw = ccw && mesh->signed_area(k) > 0.0;
      for (int nb : tris[k].neighbors)
        if (nb >= 0) {
          const auto& back = tris[nb].neighbors;
          symmetric = symmetric && std::find(back.begin(), back.end(), k) != back.end();
        }
    }
    out.push_back(flag("mesh_orientation_and_adjacency", ccw && symmetric,
                       "ccw=" + std::to_string(ccw) + " neighbors_symmetric=" + std::to_string(symmetric)));
    const long euler = static_cast<long>(mesh->vertices().size()) - static_cast<long>(mesh->edges().size()) +
                       static_cast<long>(tris.size());
    out.push_back(flag("mesh_euler_relation", euler == 1, "V-E+T=" + std::to_string(euler)));
    double perimeter = 0.0;
    for (const BoundaryEdge& be : mesh->boundary_edges()) perimeter += be.length;
    out.push_back(bounded("mesh_perimeter", std::abs(perimeter - 4.0), 1e-12));
  }

  // patches
  PatchSet patches;
  try {
    patches = build_patches(*mesh, cfg.edges_per_patch);
  } catch (const MeshError& e) {
    out.push_back(flag("patch_conditions", false, e.what()));
    return out;
  }
  {
    const PatchSet checked = cfg.inject_bad_patch ? inject_short_patch(*mesh, patches) : patches;
    const PatchCheck pc = check_patches(*mesh, checked);
    out.push_back(flag("patch_conditions", pc.ok,
                       (pc.ok ? std::string("patches=") + std::to_string(checked.patches.size()) : pc.message) +
                           " c1=" + num(checked.c1) + " c2=" + num(checked.c2)));
    std::vector<double> side(mesh->num_segments(), 0.0);
    for (const BoundaryPatch& p : checked.patches) side[p.segment] += p.measure;
    double worst = 0.0;
    for (double s : side) worst = std::max(worst, std::abs(s - 1.0));
    out.push_back(bounded("patch_partition_measure", worst, 1e-12));
  }

  // phi_r
  {
    std::vector<double> r(patches.patches.size());
    for (double& x : r) x = uniform(rng);
    const PhiR phi = build_phi_r(patches, r, p1);
    double worst = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j)
      worst = std::max(worst, std::abs(mean_normal_gradient(phi.function, patches.patches[j]) - r[j]));
    out.push_back(bounded("phi_r_mean_normal_gradient", worst, 1e-10, "min_xi_h=" + num(phi.c_xi)));

    std::set<int> covered, corner;
    for (const BoundaryPatch& p : patches.patches) covered.insert(p.triangles.begin(), p.triangles.end());
    for (int k = 0; k < p1->num_elements(); ++k)
      if (mesh->is_corner_element(k)) corner.insert(mesh->triangles()[k].v.begin(), mesh->triangles()[k].v.end());
    double outside = 0.0, at_corner = 0.0;
    for (int k = 0; k < p1->num_elements(); ++k)
      if (!covered.count(k))
        for (int d : p1->element_dofs(k)) outside = std::max(outside, std::abs(phi.function.coefficients()(d)));
    for (int v : corner) at_corner = std::max(at_corner, std::abs(phi.function.coefficients()(v)));
    out.push_back(bounded("phi_r_support_and_corners", std::max(outside, at_corner), 0.0,
                          "corner_vertices=" + std::to_string(corner.size())));
  }

  // interpolants
  const ExactSolution u = sine_solution();
  {
    const PiPartial pi = build_pi_partial(u, space, patches);
    out.push_back(bounded("pi_partial_normal_gradient_k" + std::to_string(cfg.order),
                          *std::max_element(pi.residuals.begin(), pi.residuals.end()), 1e-9));
  }
  {
    const PiCip pi = build_pi_cip(u, p1, patches);
    double grad = 0.0, mean = 0.0;
    bool signs = true;
    double min_det = std::numeric_limits<double>::infinity();
    for (const CipPatchSolve& s : pi.solves) {
      grad = std::max(grad, s.gradient_residual);
      mean = std::max(mean, s.mean_residual);
      signs = signs && s.sign_pattern;
      min_det = std::min(min_det, s.system.determinant());
    }
    out.push_back(bounded("pi_cip_normal_gradient", grad, 1e-9));
    out.push_back(bounded("pi_cip_zero_mean", mean, 1e-9));
    out.push_back(flag("pi_cip_patch_system", signs && min_det > 0.0,
                       "sign_pattern=" + std::to_string(signs) + " min_det=" + num(min_det)));
  }

  // Poisson form
  {
    const CsrMatrix flux = nitsche_flux_matrix(*space);
    const CsrMatrix adjoint = nitsche_adjoint_matrix(*space);
    const CsrMatrix sum = flux + CsrMatrix(adjoint.transpose());
    double worst = 0.0;
    for (int r = 0; r < sum.outerSize(); ++r)
      for (CsrMatrix::InnerIterator it(sum, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
    out.push_back(bounded("nitsche_boundary_terms_skew", worst, 1e-14));

    const ProblemSpec p = poisson_problem(u, BoundaryMode::nitsche_nonsym, 0.0);
    const CsrMatrix a = assemble_poisson_nitsche(space, p).matrix;
    const CsrMatrix k = stiffness_matrix(*space);
    CsrMatrix m = k;
    m += boundary_mass_matrix(*space, [](const BoundaryEdge&, double h) { return 1.0 / h; });
    double rel = 0.0;
    for (const FeFunction& v : random_probes(space, 100, cfg.mesh.seed)) {
      const Eigen::VectorXd& c = v.coefficients();
      rel = std::max(rel, std::abs(quad(a, c) - quad(k, c)) / quad(m, c));
    }
    out.push_back(bounded("poisson_positivity_identity", rel, 1e-12));
  }

  // convection-diffusion positivity
  {
    double worst = 0.0;
    for (double eps : {1.0, 1e-3}) {
      ProblemSpec p;
      p.eps = eps;
      p.beta = Point(0.5, 1.0);
      const CsrMatrix a = assemble_convdiff(space, p).matrix;
      const CsrMatrix k = stiffness_matrix(*space);
      const CsrMatrix b = boundary_mass_matrix(
          *space, [&p](const BoundaryEdge& be, double) { return 0.5 * std::abs(p.beta.dot(be.normal)); });
      for (const FeFunction& v : random_probes(space, 100, cfg.mesh.seed + 1)) {
        const Eigen::VectorXd& c = v.coefficients();
        const double bound = quad(b, c) + eps * quad(k, c);
        worst = std::max(worst, (bound - quad(a, c)) / bound);
      }
    }
    out.push_back(bounded("convdiff_positivity", worst, 1e-10));
  }

  // streamline diffusion
  if (cfg.gamma_sd == 0.0) {
    out.push_back({"sd_positivity_identity", CheckStatus::skip, "gamma_SD = 0"});
    out.push_back({"sd_parameter", CheckStatus::skip, "gamma_SD = 0"});
  } else {
    ProblemSpec p;
    p.eps = 1e-5;
    p.beta = Point(0.5, 1.0);
    p.stabilization = {StabilizationKind::sd, cfg.gamma_sd};
    const CsrMatrix a = assemble_sd(p1, p).matrix;
    const CsrMatrix stream = streamline_matrix(*p1, p);
    const CsrMatrix k = stiffness_matrix(*p1);
    const CsrMatrix b = boundary_mass_matrix(
        *p1, [&p](const BoundaryEdge& be, double) { return 0.5 * std::abs(p.beta.dot(be.normal)); });
    double worst = 0.0;
    for (const FeFunction& v : random_probes(p1, 100, cfg.mesh.seed + 2)) {
      const Eigen::VectorXd& c = v.coefficients();
      const double triple = quad(stream, c) + quad(b, c) + p.eps * quad(k, c);
      worst = std::max(worst, std::abs(quad(a, c) - triple) / triple);
    }
    out.push_back(bounded("sd_positivity_identity_p1", worst, 1e-10));
    auto p2 = std::make_shared<const FeSpace>(mesh, 2);
    const SdReport rep = sd_report(*p2, p);
    out.push_back({"sd_parameter", CheckStatus::pass,
                   "gamma_SD=" + num(cfg.gamma_sd) + " P2 bound 1/C_I^2=" + num(rep.gamma_bound) +
                       (cfg.gamma_sd > rep.gamma_bound ? " (P2 coercivity not guaranteed)" : "") +
                       " max_Pe=" + num(rep.max_peclet)});
  }

  // continuous interior penalty
  if (cfg.gamma_cip == 0.0) {
    out.push_back({"cip_jump_form", CheckStatus::skip, "gamma_CIP = 0"});
  } else {
    const Point beta(0.5, 1.0);
    const CsrMatrix j = cip_matrix(*space, beta, cfg.gamma_cip);
    const CsrMatrix jr = cip_matrix(*space, beta, cfg.gamma_cip, EdgeOrientation::high_to_low);
    double negative = 0.0, orientation = 0.0;
    for (const FeFunction& v : random_probes(space, 100, cfg.mesh.seed + 3)) {
      const Eigen::VectorXd& c = v.coefficients();
      const double jv = quad(j, c);
      negative = std::max(negative, -jv);
      orientation = std::max(orientation, std::abs(jv - quad(jr, c)) / std::max(jv, 1e-300));
    }
    const FeFunction affine = nodal_interpolate(space, [](const Point& x) { return 0.4 + 1.3 * x.x() - 2.1 * x.y(); });
    const double scale = quad(j, random_probes(space, 1, cfg.mesh.seed).front().coefficients());
    const double affine_rel = std::abs(quad(j, affine.coefficients())) / scale;
    out.push_back(bounded("cip_jump_form", std::max({negative, orientation, affine_rel}), 1e-12,
                          "orientation_rel=" + num(orientation) + " affine_rel=" + num(affine_rel)));
  }
  return out;
}

}  // namespace nitsche
