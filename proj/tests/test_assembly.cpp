#include <doctest.h>

#include <random>
#include <set>

#include "nitsche/assembly.hpp"
#include "nitsche/continuity.hpp"
#include "nitsche/convergence.hpp"
#include "nitsche/norms.hpp"

using namespace nitsche;

namespace {

std::shared_ptr<const FeSpace> space_on(int n, int k, MeshSpec spec = {MeshKind::jittered, 0.2, 1}) {
  return std::make_shared<const FeSpace>(make_mesh(n, spec), k);
}

double quad(const CsrMatrix& a, const Eigen::VectorXd& v) { return v.dot(a * v); }

double max_abs(const CsrMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (CsrMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double dist(const CsrMatrix& a, const CsrMatrix& b) { return max_abs(CsrMatrix(a - b)); }

const Point kBeta(0.5, 1.0);

}  // namespace

TEST_CASE("element stiffness on the unit right triangle") {
  std::vector<Point> v{Point(0, 0), Point(1, 0), Point(0, 1)};
  auto m = std::make_shared<const Mesh>(v, std::vector<std::array<int, 3>>{{0, 1, 2}},
                                        std::vector<BoundaryTag>{{0, 1, 0}, {1, 2, 1}, {2, 0, 2}});
  const DenseMatrix k = DenseMatrix(stiffness_matrix(FeSpace(m, 1)));
  DenseMatrix expected(3, 3);
  expected << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
  CHECK((k - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("mass matrix integrates to the domain area") {
  for (int k : {1, 2}) {
    auto s = space_on(6, k);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(s->num_dofs());
    CHECK(std::abs(quad(mass_matrix(*s), one) - 1.0) < 1e-13);
    CHECK(std::abs(quad(stiffness_matrix(*s), one)) < 1e-12);
  }
}

TEST_CASE("boundary terms of the non-symmetric form cancel") {
  for (int k : {1, 2}) {
    auto s = space_on(10, k);
    const CsrMatrix flux = nitsche_flux_matrix(*s);
    const CsrMatrix adj = nitsche_adjoint_matrix(*s);
    CHECK(max_abs(CsrMatrix(flux + CsrMatrix(adj.transpose()))) <= 1e-14);

    ProblemSpec p = poisson_problem(sine_solution(), BoundaryMode::nitsche_nonsym);
    const AssembledSystem sys = assemble_poisson_nitsche(s, p);
    const CsrMatrix stiff = stiffness_matrix(*s);
    for (const FeFunction& v : random_probes(s, 20, 3)) {
      const double scale = std::pow(norm(v, NormKind::one_h), 2);
      CHECK(std::abs(quad(sys.matrix, v.coefficients()) - quad(stiff, v.coefficients())) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("penalty enters linearly") {
  auto s = space_on(8, 2);
  ProblemSpec p = poisson_problem(sine_solution(), BoundaryMode::nitsche_nonsym);
  const CsrMatrix a0 = assemble_poisson_nitsche(s, p).matrix;
  p.gamma = 10.0;
  const CsrMatrix a10 = assemble_poisson_nitsche(s, p).matrix;
  CHECK(dist(CsrMatrix(a10 - a0), boundary_penalty_matrix(*s, 10.0)) <= 1e-12);
}

TEST_CASE("symmetric variant is symmetric") {
  auto s = space_on(8, 2);
  const CsrMatrix a = assemble_poisson_nitsche(s, poisson_problem(sine_solution(), BoundaryMode::nitsche_sym, 5.0)).matrix;
  CHECK(dist(a, CsrMatrix(a.transpose())) <= 1e-12);
}

TEST_CASE("strong boundary conditions") {
  auto s = space_on(8, 2);
  ProblemSpec p = poisson_problem(sine_solution(), BoundaryMode::strong);
  const AssembledSystem sys = assemble(s, p);
  CHECK(dist(sys.matrix, CsrMatrix(sys.matrix.transpose())) <= 1e-13);
  const FeFunction uh = solve(sys);
  for (int d : s->boundary_dofs()) CHECK(std::abs(uh.coefficients()(d)) < 1e-14);
  Eigen::LLT<DenseMatrix> llt{DenseMatrix(sys.matrix)};
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("convection-diffusion without convection is the Poisson form") {
  auto s = space_on(8, 1);
  ProblemSpec p = poisson_problem(sine_solution(), BoundaryMode::nitsche_nonsym, 3.0);
  CHECK(dist(assemble_convdiff(s, p).matrix, assemble_poisson_nitsche(s, p).matrix) == 0.0);
  p.eps = 0.25;
  CHECK(dist(assemble_convdiff(s, p).matrix, assemble_poisson_nitsche(s, p).matrix) <= 1e-15);
}

TEST_CASE("inflow boundary for beta = (0.5, 1)") {
  auto s = space_on(6, 1, {});
  const CsrMatrix in = inflow_matrix(*s, kBeta);
  std::set<int> touched;
  for (int k = 0; k < in.outerSize(); ++k)
    for (CsrMatrix::InnerIterator it(in, k); it; ++it)
      if (it.value() != 0.0) touched.insert(static_cast<int>(it.row()));
  REQUIRE_FALSE(touched.empty());
  for (int d : touched) {
    const Point& x = s->dof_coordinates()[d];
    CHECK(std::min(x.x(), x.y()) < 1e-14);
  }
  // total inflow flux: int_{x=0} 0.5 + int_{y=0} 1
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(s->num_dofs());
  CHECK(std::abs(quad(in, one) - 1.5) < 1e-13);
}

TEST_CASE("convection-diffusion positivity") {
  for (int k : {1, 2})
    for (double eps : {1.0, 1e-3}) {
      auto s = space_on(10, k);
      ProblemSpec p = manufactured_problem(sine_solution(), eps, kBeta, 0.0, BoundaryMode::nitsche_nonsym);
      const CsrMatrix a = assemble_convdiff(s, p).matrix;
      const CsrMatrix k1 = stiffness_matrix(*s);
      const CsrMatrix b = boundary_mass_matrix(
          *s, [](const BoundaryEdge& be, double) { return 0.5 * std::abs(kBeta.dot(be.normal)); });
      for (const FeFunction& v : random_probes(s, 50, 17)) {
        const Eigen::VectorXd& c = v.coefficients();
        const double lower = quad(b, c) + eps * quad(k1, c);
        CHECK(quad(a, c) >= lower - 1e-10 * lower);
      }
    }
}

TEST_CASE("streamline diffusion") {
  SUBCASE("no element above unit Peclet leaves the matrix unchanged") {
    auto s = space_on(10, 2);
    ProblemSpec p = manufactured_problem(sine_solution(), 1.0, kBeta, 0.0, BoundaryMode::nitsche_nonsym, 0.0,
                                         {StabilizationKind::sd, 0.2});
    CHECK(sd_report(*s, p).stabilized_elements == 0);
    ProblemSpec q = p;
    q.stabilization = {};
    CHECK(dist(assemble_sd(s, p).matrix, assemble_convdiff(s, q).matrix) == 0.0);
    CHECK((assemble_sd(s, p).rhs - assemble_convdiff(s, q).rhs).norm() == 0.0);
  }
  SUBCASE("parameter arithmetic") {
    ProblemSpec p;
    p.eps = 1e-5;
    p.beta = kBeta;
    p.stabilization = {StabilizationKind::sd, 0.2};
    CHECK(sd_delta(1.0 / 80, p) == doctest::Approx(0.2 / 80 / std::sqrt(1.25)).epsilon(1e-15));
    CHECK(std::sqrt(1.25) / 80 / 1e-5 == doctest::Approx(1397.5).epsilon(1e-4));
    p.eps = 1.0;
    CHECK(sd_delta(1.0 / 80, p) == 0.0);
  }
  SUBCASE("diffusion term vanishes for P1") {
    auto s = space_on(10, 1);
    ProblemSpec p;
    p.beta = kBeta;
    p.stabilization = {StabilizationKind::sd, 0.2};
    p.eps = 1e-5;
    const CsrMatrix a = streamline_matrix(*s, p);
    p.eps = 1e-6;
    CHECK(dist(a, streamline_matrix(*s, p)) == 0.0);
    auto s2 = space_on(10, 2);
    const CsrMatrix b = streamline_matrix(*s2, p);
    p.eps = 1e-5;
    CHECK(dist(b, streamline_matrix(*s2, p)) > 0.0);
  }
  SUBCASE("reaction is rejected") {
    auto s = space_on(6, 1);
    ProblemSpec p = manufactured_problem(sine_solution(), 1e-3, kBeta, 1.0, BoundaryMode::nitsche_nonsym, 0.0,
                                         {StabilizationKind::sd, 0.2});
    CHECK_THROWS_AS(assemble(s, p), ConfigError);
  }
  SUBCASE("P2 inverse constant is reported") {
    ProblemSpec p;
    p.beta = kBeta;
    p.eps = 1e-5;
    p.stabilization = {StabilizationKind::sd, 0.2};
    const SdReport r1 = sd_report(*space_on(8, 1, {}), p);
    const SdReport r2 = sd_report(*space_on(8, 2, {}), p);
    CHECK(std::isinf(r1.gamma_bound));
    CHECK(r2.inverse_constant > 0.0);
    CHECK(r2.gamma_bound == doctest::Approx(1.0 / (r2.inverse_constant * r2.inverse_constant)));
    CHECK(r2.stabilized_elements == 128);
  }
}

TEST_CASE("gradient-jump penalty") {
  auto s = space_on(10, 2);
  const CsrMatrix j = cip_matrix(*s, kBeta, 0.005);
  SUBCASE("affine functions carry no jump") {
    const FeFunction v = nodal_interpolate(s, [](const Point& x) { return 0.4 - 2 * x.x() + 3 * x.y(); });
    CHECK(std::abs(quad(j, v.coefficients())) < 1e-14);
  }
  SUBCASE("non-negative and independent of the edge orientation") {
    const CsrMatrix flipped = cip_matrix(*s, kBeta, 0.005, EdgeOrientation::high_to_low);
    CHECK(dist(j, flipped) <= 1e-16);
    CHECK(dist(j, CsrMatrix(j.transpose())) <= 1e-16);
    for (const FeFunction& v : random_probes(s, 30, 5)) CHECK(quad(j, v.coefficients()) >= 0.0);
  }
  SUBCASE("edges parallel to the velocity contribute nothing") {
    auto p1 = space_on(4, 1, {});
    const FeFunction kink = nodal_interpolate(p1, [](const Point& x) { return std::abs(x.y() - 0.5); });
    CHECK(quad(cip_matrix(*p1, Point(1, 0), 1.0), kink.coefficients()) == doctest::Approx(0.0));
    CHECK(quad(cip_matrix(*p1, Point(0, 1), 1.0), kink.coefficients()) > 0.1);
  }
  SUBCASE("coupling stays within edge-adjacent elements") {
    const Mesh& m = s->mesh();
    std::vector<std::set<int>> reach(s->num_dofs());
    for (const Edge& e : m.edges()) {
      std::set<int> dofs;
      for (int t : e.tri)
        if (t >= 0)
          for (int d : s->element_dofs(t)) dofs.insert(d);
      for (int d : dofs) reach[d].insert(dofs.begin(), dofs.end());
    }
    for (int r = 0; r < j.outerSize(); ++r)
      for (CsrMatrix::InnerIterator it(j, r); it; ++it) CHECK(reach[r].count(static_cast<int>(it.col())) == 1);
  }
}

TEST_CASE("volume coupling stays within shared elements") {
  auto s = space_on(6, 2);
  const CsrMatrix a = assemble(s, poisson_problem(sine_solution(), BoundaryMode::nitsche_nonsym, 5.0)).matrix;
  std::vector<std::set<int>> reach(s->num_dofs());
  for (int k = 0; k < s->num_elements(); ++k)
    for (int d : s->element_dofs(k))
      for (int e : s->element_dofs(k)) reach[d].insert(e);
  CHECK(is_valid_csr(a));
  for (int r = 0; r < a.outerSize(); ++r)
    for (CsrMatrix::InnerIterator it(a, r); it; ++it) CHECK(reach[r].count(static_cast<int>(it.col())) == 1);
}

TEST_CASE("polynomial solutions are reproduced exactly") {
  const Point beta(0.5, 1.0);
  for (int k : {1, 2}) {
    auto s = space_on(8, k);
    const ExactSolution u = polynomial_solution(k);
    const Eigen::VectorXd exact = nodal_interpolate(s, u.value).coefficients();
    std::vector<ProblemSpec> problems;
    for (BoundaryMode bc : {BoundaryMode::nitsche_nonsym, BoundaryMode::nitsche_sym, BoundaryMode::strong})
      for (double gamma : {0.0, 10.0}) problems.push_back(poisson_problem(u, bc, gamma));
    problems.push_back(manufactured_problem(u, 1e-2, beta, 1.0, BoundaryMode::nitsche_nonsym));
    problems.push_back(manufactured_problem(u, 1e-2, beta, 1.0, BoundaryMode::nitsche_nonsym, 10.0));
    problems.push_back(manufactured_problem(u, 1e-4, beta, 0.0, BoundaryMode::nitsche_nonsym, 0.0,
                                            {StabilizationKind::sd, 0.2}));
    problems.push_back(manufactured_problem(u, 1e-4, beta, 0.0, BoundaryMode::strong, 0.0,
                                            {StabilizationKind::sd, 0.2}));
    if (k == 1)
      problems.push_back(manufactured_problem(u, 1e-4, beta, 1.0, BoundaryMode::nitsche_nonsym, 0.0,
                                              {StabilizationKind::cip, 0.005}));
    for (const ProblemSpec& p : problems) {
      CAPTURE(k);
      CAPTURE(to_string(p.bc));
      CAPTURE(p.gamma);
      CAPTURE(to_string(p.stabilization.kind));
      const FeFunction uh = solve(assemble(s, p));
      CHECK((uh.coefficients() - exact).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
  }
}

TEST_CASE("assembly is deterministic") {
  auto s = space_on(12, 2);
  ProblemSpec p = manufactured_problem(sine_solution(), 1e-3, kBeta, 1.0, BoundaryMode::nitsche_nonsym, 0.0,
                                       {StabilizationKind::cip, 0.005});
  const AssembledSystem a = assemble(s, p), b = assemble(s, p);
  CHECK(dist(a.matrix, b.matrix) == 0.0);
  CHECK((a.rhs - b.rhs).norm() == 0.0);
}

TEST_CASE("invalid problems") {
  auto s = space_on(6, 1);
  ProblemSpec p = poisson_problem(sine_solution(), BoundaryMode::nitsche_nonsym);
  p.eps = 0.0;
  CHECK_THROWS_AS(assemble(s, p), ConfigError);
  p.eps = 1.0;
  p.gamma = -1.0;
  CHECK_THROWS_AS(assemble(s, p), ConfigError);
  p.gamma = 0.0;
  p.bc = BoundaryMode::strong;
  CHECK_THROWS_AS(assemble_poisson_nitsche(s, p), ConfigError);
  CHECK_THROWS_AS(parse_boundary_mode("weak"), ConfigError);
  CHECK(parse_boundary_mode("nitsche-sym") == BoundaryMode::nitsche_sym);
}
