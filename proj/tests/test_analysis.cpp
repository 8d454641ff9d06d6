#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nitsche/continuity.hpp"
#include "nitsche/convergence.hpp"
#include "nitsche/infsup.hpp"
#include "nitsche/interpolants.hpp"
#include "nitsche/norms.hpp"
#include "nitsche/phi_r.hpp"

using namespace nitsche;

namespace {

const double kPi = std::acos(-1.0);

std::shared_ptr<const FeSpace> space_on(int n, int k, MeshSpec spec = {MeshKind::jittered, 0.2, 1}) {
  return std::make_shared<const FeSpace>(make_mesh(n, spec), k);
}

std::vector<double> random_targets(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> r(count);
  for (double& x : r) x = u(rng);
  return r;
}

double l2_error(const ExactSolution& u, const FeFunction& f) { return errors(u, f).l2; }

}  // namespace

TEST_CASE("norms of the zero function vanish") {
  auto s = space_on(6, 2);
  const FeFunction zero(s);
  ProblemSpec p;
  p.beta = Point(0.5, 1.0);
  p.eps = 1e-3;
  p.stabilization = {StabilizationKind::sd, 0.2};
  for (NormKind k : {NormKind::l2, NormKind::h1_semi, NormKind::one_h, NormKind::half_h_boundary, NormKind::one_h_beta,
                     NormKind::triple_h_delta, NormKind::star_poisson, NormKind::triple_star})
    CHECK(norm(zero, k, p) == 0.0);
}

TEST_CASE("constant function: only the boundary part of the mesh-dependent norm") {
  auto s = space_on(7, 1);
  const FeFunction one(s, Eigen::VectorXd::Ones(s->num_dofs()));
  const Mesh& m = s->mesh();
  double expected = 0.0;
  for (const BoundaryEdge& be : m.boundary_edges()) expected += be.length / m.element_diameter(be.triangle);
  CHECK(std::pow(norm(one, NormKind::one_h), 2) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(norm(one, NormKind::h1_semi) < 1e-12);
  CHECK(norm(one, NormKind::l2) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("sine norms converge to the analytic integrals") {
  const ExactSolution u = sine_solution();
  const FeFunction f = nodal_interpolate(space_on(80, 2, {}), u.value);
  CHECK(std::pow(norm(f, NormKind::l2), 2) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(std::pow(norm(f, NormKind::h1_semi), 2) == doctest::Approx(5 * kPi * kPi / 4).epsilon(1e-4));
  // exact error sampler on the interpolant of zero
  const FeFunction zero(space_on(10, 1, {}));
  CHECK(std::pow(error_norm(u, zero, NormKind::l2), 2) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::pow(error_norm(u, zero, NormKind::h1_semi), 2) == doctest::Approx(5 * kPi * kPi / 4).epsilon(1e-10));
}

TEST_CASE("velocity-weighted norms need a velocity") {
  const FeFunction f(space_on(4, 1));
  CHECK_THROWS_AS(norm(f, NormKind::one_h_beta), ConfigError);
  CHECK_THROWS_AS(norm(f, NormKind::triple_h_delta), ConfigError);
  CHECK_THROWS_AS(norm(f, NormKind::triple_star), ConfigError);
}

TEST_CASE("norm composition") {
  auto s = space_on(8, 2);
  const FeFunction f = nodal_interpolate(s, [](const Point& x) { return std::exp(x.x()) * (1 + x.y()); });
  ProblemSpec p;
  p.beta = Point(0.5, 1.0);
  p.eps = 1e-4;
  p.stabilization = {StabilizationKind::sd, 0.2};
  const NormParts np = norm_parts(sampler(f), *s, p);
  CHECK(combine(np, NormKind::one_h, p) == doctest::Approx(std::sqrt(np.grad + np.boundary_h)));
  CHECK(combine(np, NormKind::star_poisson, p) ==
        doctest::Approx(std::sqrt(np.grad + np.boundary_h) + std::sqrt(np.normal_flux_h)));
  CHECK(combine(np, NormKind::one_h_beta, p) ==
        doctest::Approx(std::sqrt(p.eps * (np.grad + np.boundary_h) + 0.5 * np.boundary_beta)));
  CHECK(combine(np, NormKind::triple_h_delta, p) ==
        doctest::Approx(std::sqrt(np.streamline + 0.5 * np.boundary_beta + p.eps * np.grad)));
  CHECK(np.streamline > 0.0);
  CHECK(np.inverse_delta > 0.0);
  CHECK(np.delta_laplacian > 0.0);
  p.stabilization = {};
  CHECK(norm_parts(sampler(f), *s, p).streamline == 0.0);
}

TEST_CASE("phi_r construction") {
  auto p1 = space_on(20, 1);
  const PatchSet ps = build_patches(p1->mesh());
  SUBCASE("zero targets") {
    const PhiR phi = build_phi_r(ps, std::vector<double>(ps.patches.size(), 0.0), p1);
    CHECK(phi.function.coefficients().norm() == 0.0);
  }
  SUBCASE("unit target on one patch") {
    std::vector<double> r(ps.patches.size(), 0.0);
    r[3] = 1.0;
    const PhiR phi = build_phi_r(ps, r, p1);
    for (std::size_t j = 0; j < ps.patches.size(); ++j)
      CHECK(std::abs(mean_normal_gradient(phi.function, ps.patches[j]) - r[j]) <= 1e-10);
  }
  SUBCASE("random targets, support and corners") {
    const std::vector<double> r = random_targets(ps.patches.size(), 2);
    const PhiR phi = build_phi_r(ps, r, p1);
    const Mesh& m = p1->mesh();
    std::vector<bool> in_patch(m.vertices().size(), false);
    for (const BoundaryPatch& bp : ps.patches)
      for (int k : bp.triangles)
        for (int v : m.triangles()[k].v) in_patch[v] = true;
    for (std::size_t j = 0; j < ps.patches.size(); ++j)
      CHECK(std::abs(mean_normal_gradient(phi.function, ps.patches[j]) - r[j]) <= 1e-10);
    for (std::size_t v = 0; v < m.vertices().size(); ++v)
      if (!in_patch[v]) CHECK(phi.function.coefficients()(v) == 0.0);
    for (int k = 0; k < static_cast<int>(m.triangles().size()); ++k)
      if (m.is_corner_element(k))
        for (int v : m.triangles()[k].v) CHECK(phi.function.coefficients()(v) == 0.0);
    CHECK(phi.c_xi > 0.0);
  }
  SUBCASE("bump is one on the open face") {
    const Eigen::VectorXd b = patch_bump(*p1, ps.patches[5]);
    for (int v : ps.patches[5].interior_vertices) CHECK(b(v) == 1.0);
    CHECK(b.sum() == doctest::Approx(static_cast<double>(ps.patches[5].interior_vertices.size())));
  }
}

TEST_CASE("phi_r stability ratio stays bounded under refinement") {
  double lo = 1e300, hi = 0.0;
  for (int n : {10, 20, 40, 80}) {
    auto p1 = space_on(n, 1);
    const PatchSet ps = build_patches(p1->mesh());
    const PhiR phi = build_phi_r(ps, random_targets(ps.patches.size(), 7), p1);
    const double ratio = phi_r_stability_ratio(phi, ps);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi / lo < 2.0);
}

TEST_CASE("boundary-corrected interpolant") {
  SUBCASE("no correction for globally affine data") {
    auto p1 = space_on(10, 1);
    const PiPartial pi = build_pi_partial(polynomial_solution(1), p1, build_patches(p1->mesh()));
    CHECK(pi.correction.function.coefficients().lpNorm<Eigen::Infinity>() < 1e-12);
  }
  // the P1 correction decays like h^{k+3/2} in L2; for P2 it dominates the
  // interpolation error on every affordable mesh, so only the lower bound is sharp
  for (int k : {1, 2}) {
    CAPTURE(k);
    const ExactSolution u = sine_solution();
    double e[2];
    for (int i = 0; i < 2; ++i) {
      auto s = space_on((k == 1 ? 40 : 20) << i, k);
      const PiPartial pi = build_pi_partial(u, s, build_patches(s->mesh()));
      for (double r : pi.residuals) CHECK(r <= 1e-9);
      e[i] = l2_error(u, pi.function);
    }
    const double rate = std::log2(e[0] / e[1]);
    CHECK(rate >= k + 1 - 0.2);
    if (k == 1) CHECK(rate <= k + 1 + 0.2);
  }
}

TEST_CASE("interior-penalty interpolant") {
  SUBCASE("constants are reproduced") {
    auto p1 = space_on(20, 1);
    ExactSolution c{[](const Point&) { return 2.5; }, [](const Point&) { return Point(0, 0); },
                    [](const Point&) { return 0.0; }};
    const PiCip pi = build_pi_cip(c, p1, build_patches(p1->mesh()));
    CHECK((pi.function.coefficients().array() - 2.5).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("constraints and sign pattern") {
    auto p1 = space_on(20, 1);
    const PiCip pi = build_pi_cip(sine_solution(), p1, build_patches(p1->mesh()));
    for (const CipPatchSolve& s : pi.solves) {
      CHECK(s.gradient_residual <= 1e-9);
      CHECK(s.mean_residual <= 1e-9);
      CHECK(s.sign_pattern);
      CHECK(s.system.determinant() > 0.0);
    }
    for (const CipPatch& cp : pi.patches) {
      CHECK_FALSE(cp.interior_nodes.empty());
      CHECK(cp.face_nodes.size() >= 3);
    }
  }
  SUBCASE("second-order L2 rate") {
    const ExactSolution u = sine_solution();
    double e[2];
    for (int i = 0; i < 2; ++i) {
      auto p1 = space_on(40 << i, 1);
      e[i] = l2_error(u, build_pi_cip(u, p1, build_patches(p1->mesh())).function);
    }
    CHECK(std::log2(e[0] / e[1]) == doctest::Approx(2.0).epsilon(0.1));
  }
  SUBCASE("P2 is refused") {
    auto p2 = space_on(10, 2);
    CHECK_THROWS_AS(build_pi_cip(sine_solution(), p2, build_patches(p2->mesh())), ConfigError);
  }
}

TEST_CASE("inf-sup estimate") {
  auto s = space_on(8, 1, {});
  ProblemSpec p;
  const InfSupResult r = infsup_constant(InfSupForm::poisson_nitsche, s, p);
  CHECK(r.c_s > 0.5);
  CHECK(r.dofs == 81);
  CHECK(norm(r.minimizer, NormKind::one_h) == doctest::Approx(1.0).epsilon(1e-8));
  p.bc = BoundaryMode::nitsche_sym;
  CHECK(infsup_constant(InfSupForm::poisson_nitsche, s, p).c_s < 0.1 * r.c_s);
  p.bc = BoundaryMode::nitsche_nonsym;
  p.beta = Point(0.5, 1.0);
  p.eps = 0.1;
  CHECK(infsup_constant(InfSupForm::convdiff, s, p).c_s > 0.0);
  CHECK_THROWS_AS(infsup_constant(InfSupForm::poisson_nitsche, space_on(50, 1), {}), ConfigError);
}

TEST_CASE("continuity probe") {
  auto s = space_on(10, 1);
  ProblemSpec p;
  SUBCASE("self pairing is dominated by the norms") {
    for (const FeFunction& v : random_probes(s, 10, 3))
      CHECK(continuity_ratio(sampler(v), {v}, p) <= 1.0 + 1e-12);
  }
  SUBCASE("disjoint supports") {
    const Mesh& m = s->mesh();
    auto closest = [&](Point x) {
      int best = 0;
      for (int v = 0; v < static_cast<int>(m.vertices().size()); ++v)
        if ((m.vertices()[v] - x).norm() < (m.vertices()[best] - x).norm()) best = v;
      return best;
    };
    FeFunction a(s), b(s);
    a.coefficients()(closest(Point(0.3, 0.3))) = 1.0;
    b.coefficients()(closest(Point(0.7, 0.7))) = 1.0;
    CHECK(continuity_ratio(sampler(a), {b}, p) == 0.0);
  }
  SUBCASE("zero probe") { CHECK_THROWS_AS(continuity_ratio(sampler(FeFunction(s)), {FeFunction(s)}, p), std::invalid_argument); }
  SUBCASE("bounded on interpolation errors across refinement") {
    // u - u_h itself is a-orthogonal to V_h, so the interpolation error is the informative probe
    const ExactSolution u = sine_solution();
    std::vector<double> ratios;
    for (int n : {10, 20, 40, 80}) {
      auto sp = space_on(n, 1);
      const FeFunction ih = nodal_interpolate(sp, u.value);
      ratios.push_back(continuity_ratio(error_sampler(u, ih), random_probes(sp, 100, 1), p));
    }
    for (double r : ratios) CHECK(r <= 1.0);
    CHECK(ratios.back() <= ratios.front());
  }
}

TEST_CASE("rate extraction") {
  const double c = 3.7;
  for (double p : {0.5, 1.0, 2.0, 3.4}) {
    const double h0 = 0.1, h1 = 0.05;
    CHECK(std::abs(observed_rate(c * std::pow(h0, p), c * std::pow(h1, p), h0, h1) - p) <= 1e-12);
  }
}

TEST_CASE("convergence tables") {
  const ExactSolution u = sine_solution();
  const MeshSpec mesh{MeshKind::jittered, 0.2, 1};
  SUBCASE("single level has no rates") {
    const ConvergenceTable t = convergence_study(poisson_problem(u, BoundaryMode::nitsche_nonsym), u, 1, mesh, 1);
    REQUIRE(t.rows.size() == 1);
    CHECK_FALSE(t.rows[0].l2_rate);
    CHECK_FALSE(t.rows[0].h1_rate);
  }
  SUBCASE("polynomial data is flagged exact") {
    const ExactSolution q = polynomial_solution(2);
    const ConvergenceTable t = convergence_study(poisson_problem(q, BoundaryMode::nitsche_nonsym), q, 2, mesh, 2);
    CHECK(t.exact);
    for (const ConvergenceRow& r : t.rows) CHECK(r.l2 <= 1e-9);
  }
  SUBCASE("CSV layout") {
    const ConvergenceTable t = convergence_study(poisson_problem(u, BoundaryMode::nitsche_nonsym), u, 1, mesh, 2);
    std::ostringstream os;
    write_csv(t, os);
    std::istringstream in(os.str());
    std::string line, header;
    while (std::getline(in, line) && line.rfind("#", 0) == 0) CHECK(line.find('=') != std::string::npos);
    CHECK(line == "n,h,dofs,l2_err,l2_rate,h1_err,h1_rate");
    std::getline(in, line);
    CHECK(line.rfind("10,", 0) == 0);
    CHECK(line.back() == ',');
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
    std::getline(in, line);
    CHECK(line.rfind("20,", 0) == 0);
    CHECK(t.metadata.at("order") == "1");
    CHECK(t.metadata.at("bc") == "nitsche");
  }
  SUBCASE("scientific formatting") {
    CHECK(sci3(0.082) == "8.20E-02");
    CHECK(sci3(3.3e-4) == "3.30E-04");
  }
  SUBCASE("L2 rates bracket") {
    for (int k : {1, 2}) {
      const ConvergenceTable t = convergence_study(poisson_problem(u, BoundaryMode::nitsche_nonsym), u, k, mesh, 3);
      const double rate = *t.rows.back().l2_rate;
      CAPTURE(k);
      CHECK(rate >= k + 0.5);
      CHECK(rate <= k + 1.5);
    }
  }
}
