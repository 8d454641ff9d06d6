// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "nitsche/assembly.hpp"
#include "nitsche/continuity.hpp"
#include "nitsche/convergence.hpp"
#include "nitsche/experiments.hpp"
#include "nitsche/infsup.hpp"
#include "nitsche/interpolants.hpp"
#include "nitsche/norms.hpp"
#include "nitsche/phi_r.hpp"

using namespace nitsche;

namespace {

using Clock = std::chrono::steady_clock;

// Reference magnitudes for the smooth manufactured problem on unstructured meshes.
constexpr double kRefP1L2 = 3.3e-4;   // n = 80
constexpr double kRefP1H1 = 8.2e-2;   // n = 80
constexpr double kRefP2L2 = 2.1e-5;   // n = 40
constexpr double kMagnitudeFactor = 3.0;

const MeshSpec kJittered{MeshKind::jittered, 0.2, 1};
const Point kBeta(0.5, 1.0);

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool within_factor(double v, double ref, double factor) { return v <= factor * ref && v >= ref / factor; }

// Two significant digits, as printed in the tables.
std::string sig2(double v) { return fmt("%.1E", v); }

std::shared_ptr<const FeSpace> space_on(int n, int k, const MeshSpec& spec = kJittered) {
  return std::make_shared<const FeSpace>(make_mesh(n, spec), k);
}

double quad(const CsrMatrix& a, const Eigen::VectorXd& v) { return v.dot(a * v); }

Outcome table_reproduction(int k, int check_n, double ref_l2, double l2_min_rate, double h1_lo, double h1_hi,
                           double max_seconds) {
  const ExactSolution u = sine_solution();
  const auto t0 = Clock::now();
  const ConvergenceTable t =
      convergence_study(poisson_problem(u, BoundaryMode::nitsche_nonsym), u, k, kJittered, 4);
  const double elapsed = seconds(t0);
  const ConvergenceRow& last = t.rows.back();
  const auto at = std::find_if(t.rows.begin(), t.rows.end(), [&](const ConvergenceRow& r) { return r.n == check_n; });
  Outcome o;
  o.pass = !t.partial && *last.l2_rate >= l2_min_rate && *last.h1_rate >= h1_lo && *last.h1_rate <= h1_hi &&
           within_factor(at->l2, ref_l2, kMagnitudeFactor) && elapsed < max_seconds;
  o.detail = "L2 rate " + fmt("%.2f", *last.l2_rate) + " (>= " + fmt("%.1f", l2_min_rate) + "), H1 rate " +
             fmt("%.2f", *last.h1_rate) + " in [" + fmt("%.2f", h1_lo) + ", " + fmt("%.2f", h1_hi) + "], L2(n=" +
             std::to_string(check_n) + ") " + sci3(at->l2) + " vs " + sci3(ref_l2) + " (ratio " +
             fmt("%.2f", at->l2 / ref_l2) + ", limit 3)";
  if (k == 1) {
    const bool h1_ok = within_factor(last.h1, kRefP1H1, kMagnitudeFactor);
    o.pass = o.pass && h1_ok;
    o.detail += ", H1(n=80) " + sci3(last.h1) + " vs " + sci3(kRefP1H1);
  }
  o.detail += ", " + fmt("%.1f", elapsed) + " s";
  return o;
}

Outcome criterion1() { return table_reproduction(1, 80, kRefP1L2, 1.9, 0.85, 1.2, 60.0); }
Outcome criterion2() { return table_reproduction(2, 40, kRefP2L2, 2.9, 1.85, 2.2, 120.0); }

Outcome criterion3() {
  const ExactSolution u = sine_solution();
  Outcome o;
  for (auto [k, n, limit] : {std::tuple{1, 80, 1.5}, std::tuple{2, 40, 2.0}}) {
    auto s = space_on(n, k);
    double lo = 1e300, hi = 0.0;
    std::string h1_first;
    bool h1_same = true;
    for (double gamma : {0.0, 10.0, 20.0, 40.0, 80.0}) {
      const ErrorPair e = errors(u, solve(assemble(s, poisson_problem(u, BoundaryMode::nitsche_nonsym, gamma))));
      lo = std::min(lo, e.l2);
      hi = std::max(hi, e.l2);
      if (h1_first.empty()) h1_first = sig2(e.h1);
      h1_same = h1_same && sig2(e.h1) == h1_first;
    }
    const bool ok = h1_same && hi / lo <= limit;
    o.pass = o.pass && ok;
    o.detail += "P" + std::to_string(k) + " n=" + std::to_string(n) + ": L2 max/min " + fmt("%.2f", hi / lo) +
                " (<= " + fmt("%.1f", limit) + "), H1 " + (h1_same ? "constant" : "varies") + " at 2 digits; ";
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  double worst = 0.0;
  for (int k : {1, 2})
    for (int n : {10, 20}) {
      auto s = space_on(n, k);
      const CsrMatrix a =
          assemble_poisson_nitsche(s, poisson_problem(sine_solution(), BoundaryMode::nitsche_nonsym)).matrix;
      const CsrMatrix stiff = stiffness_matrix(*s);
      for (const FeFunction& v : random_probes(s, 100, 2024)) {
        const Eigen::VectorXd& c = v.coefficients();
        const double scale = std::pow(norm(v, NormKind::one_h), 2);
        worst = std::max(worst, std::abs(quad(a, c) - quad(stiff, c)) / scale);
      }
    }
  o.pass = worst <= 1e-12;
  o.detail = "max |a_h(v,v) - |grad v|^2| / |v|_{1,h}^2 = " + fmt("%.2e", worst) + " (<= 1e-12), P1/P2, n=10,20";
  return o;
}

Outcome criterion5() {
  Outcome o;
  double worst = 0.0;
  for (int k : {1, 2})
    for (double eps : {1.0, 1e-3}) {
      auto s = space_on(20, k);
      const ProblemSpec p = manufactured_problem(sine_solution(), eps, kBeta, 0.0, BoundaryMode::nitsche_nonsym);
      const CsrMatrix a = assemble_convdiff(s, p).matrix;
      const CsrMatrix stiff = stiffness_matrix(*s);
      const CsrMatrix bnd = boundary_mass_matrix(
          *s, [](const BoundaryEdge& be, double) { return 0.5 * std::abs(kBeta.dot(be.normal)); });
      for (const FeFunction& v : random_probes(s, 100, 77)) {
        const Eigen::VectorXd& c = v.coefficients();
        const double lower = quad(bnd, c) + eps * quad(stiff, c);
        worst = std::max(worst, (lower - quad(a, c)) / lower);
      }
    }
  o.pass = worst <= 1e-10;
  o.detail = "max relative violation " + fmt("%.2e", std::max(worst, 0.0)) + " (<= 1e-10), beta=(0.5,1), eps=1,1e-3";
  return o;
}

Outcome criterion6() {
  Outcome o;
  double worst = 0.0, lo = 1e300, hi = 0.0;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int n : {10, 20, 40, 80}) {
    auto p1 = space_on(n, 1);
    const PatchSet ps = build_patches(p1->mesh());
    std::vector<double> r(ps.patches.size());
    for (double& x : r) x = dist(rng);
    const PhiR phi = build_phi_r(ps, r, p1);
    for (std::size_t j = 0; j < ps.patches.size(); ++j)
      worst = std::max(worst, std::abs(mean_normal_gradient(phi.function, ps.patches[j]) - r[j]));
    const double ratio = phi_r_stability_ratio(phi, ps);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  o.pass = worst <= 1e-10 && hi / lo < 2.0;
  o.detail = "constraint residual " + fmt("%.2e", worst) + " (<= 1e-10), stability ratio in [" + fmt("%.3f", lo) +
             ", " + fmt("%.3f", hi) + "], spread " + fmt("%.2f", hi / lo) + " (< 2)";
  return o;
}

Outcome criterion7() {
  const auto t0 = Clock::now();
  std::vector<double> cs;
  for (int n : {8, 12, 16}) cs.push_back(infsup_constant(InfSupForm::poisson_nitsche, space_on(n, 1), {}).c_s);
  const double lo = *std::min_element(cs.begin(), cs.end()), hi = *std::max_element(cs.begin(), cs.end());
  const double elapsed = seconds(t0);
  Outcome o;
  o.pass = lo > 0.0 && lo / hi >= 0.9 && elapsed < 300.0;
  o.detail = "c_s = " + fmt("%.4f", cs[0]) + ", " + fmt("%.4f", cs[1]) + ", " + fmt("%.4f", cs[2]) +
             " for n=8,12,16, min/max " + fmt("%.3f", lo / hi) + " (>= 0.9), " + fmt("%.1f", elapsed) + " s";
  return o;
}

Outcome criterion8() {
  const ExactSolution u = sine_solution();
  double h2 = 0.0, cip_grad = 0.0, cip_mean = 0.0;
  double partial_err[2], cip_err[2], partial_p2[2];
  for (int i = 0; i < 2; ++i) {
    const int n = 40 << i;
    auto p1 = space_on(n, 1);
    const PatchSet ps = build_patches(p1->mesh());
    const PiPartial pp = build_pi_partial(u, p1, ps);
    for (double r : pp.residuals) h2 = std::max(h2, r);
    partial_err[i] = errors(u, pp.function).l2;
    const PiCip pc = build_pi_cip(u, p1, ps);
    for (const CipPatchSolve& s : pc.solves) {
      cip_grad = std::max(cip_grad, s.gradient_residual);
      cip_mean = std::max(cip_mean, s.mean_residual);
    }
    cip_err[i] = errors(u, pc.function).l2;
    auto p2 = space_on(n, 2);
    const PiPartial pq = build_pi_partial(u, p2, build_patches(p2->mesh()));
    for (double r : pq.residuals) h2 = std::max(h2, r);
    partial_p2[i] = errors(u, pq.function).l2;
  }
  const double rate_partial = std::log2(partial_err[0] / partial_err[1]);
  const double rate_cip = std::log2(cip_err[0] / cip_err[1]);
  const double rate_p2 = std::log2(partial_p2[0] / partial_p2[1]);
  Outcome o;
  o.pass = h2 <= 1e-9 && cip_grad <= 1e-9 && cip_mean <= 1e-9 && std::abs(rate_partial - 2.0) <= 0.2 &&
           std::abs(rate_cip - 2.0) <= 0.2;
  o.detail = "normal-gradient residual " + fmt("%.1e", h2) + ", CIP gradient/mean residuals " + fmt("%.1e", cip_grad) +
             "/" + fmt("%.1e", cip_mean) + " (<= 1e-9); P1 L2 rates " + fmt("%.2f", rate_partial) + " and " +
             fmt("%.2f", rate_cip) + " (2 +/- 0.2); P2 boundary-corrected rate " + fmt("%.2f", rate_p2) +
             " (not asserted)";
  return o;
}

Outcome criterion9() {
  double worst = 0.0;
  int runs = 0;
  for (int k : {1, 2}) {
    auto s = space_on(8, k);
    const ExactSolution u = polynomial_solution(k);
    const Eigen::VectorXd exact = nodal_interpolate(s, u.value).coefficients();
    for (BoundaryMode bc : {BoundaryMode::nitsche_nonsym, BoundaryMode::nitsche_sym, BoundaryMode::strong})
      for (double gamma : {0.0, 10.0}) {
        const FeFunction uh = solve(assemble(s, poisson_problem(u, bc, gamma)));
        worst = std::max(worst, (uh.coefficients() - exact).lpNorm<Eigen::Infinity>());
        ++runs;
      }
  }
  Outcome o;
  o.pass = worst <= 1e-9;
  o.detail = "max coefficient error " + fmt("%.2e", worst) + " (<= 1e-9) over " + std::to_string(runs) +
             " runs: P1/P2, three boundary modes, gamma=0,10";
  return o;
}

OutflowReport outflow_run(int k, BoundaryMode bc, StabilizationKind stab) {
  RunConfig c;
  c.command = "outflow";
  c.order = k;
  c.eps = 1e-5;
  c.beta = kBeta;
  c.bc = bc;
  c.stab = stab;
  c.mesh.kind = MeshKind::structured;
  auto s = std::make_shared<const FeSpace>(run_mesh(c, 80), k);
  const ProblemSpec p = outflow_problem(c);
  return outflow_report(solve(assemble(s, p)), p.beta);
}

Outcome criterion10() {
  const OutflowReport strong = outflow_run(1, BoundaryMode::strong, StabilizationKind::none);
  const OutflowReport weak = outflow_run(1, BoundaryMode::nitsche_nonsym, StabilizationKind::none);
  const OutflowReport plain = outflow_run(2, BoundaryMode::nitsche_nonsym, StabilizationKind::none);
  const OutflowReport sd = outflow_run(2, BoundaryMode::nitsche_nonsym, StabilizationKind::sd);
  const OutflowReport cip = outflow_run(2, BoundaryMode::nitsche_nonsym, StabilizationKind::cip);
  const double overshoot = strong.max_value / weak.max_value;
  const double sd_gain = plain.oscillation / sd.oscillation, cip_gain = plain.oscillation / cip.oscillation;
  Outcome o;
  o.pass = overshoot >= 1.5 && sd_gain >= 5.0 && cip_gain >= 5.0;
  o.detail = "P1 max strong/weak " + fmt("%.2f", strong.max_value) + "/" + fmt("%.3f", weak.max_value) + " = " +
             fmt("%.1f", overshoot) + " (>= 1.5); P2 oscillation reduction SD " + fmt("%.1f", sd_gain) + "x, CIP " +
             fmt("%.1f", cip_gain) + "x (>= 5)";
  return o;
}

Outcome criterion11() {
  const ExactSolution u = sine_solution();
  const std::vector<std::pair<std::string, MeshSpec>> families{
      {"structured", {MeshKind::structured}},
      {"jittered 0.2 seed 1", {MeshKind::jittered, 0.2, 1}},
      {"jittered 0.2 seed 2", {MeshKind::jittered, 0.2, 2}},
      {"jittered 0.1 seed 3", {MeshKind::jittered, 0.1, 3}}};
  Outcome o;
  double lo = 1e300, hi = 0.0;
  for (const auto& [name, spec] : families) {
    const ConvergenceTable t = convergence_study(poisson_problem(u, BoundaryMode::nitsche_nonsym), u, 1, spec, 4);
    for (const ConvergenceRow& r : t.rows)
      if (r.l2_rate) {
        lo = std::min(lo, *r.l2_rate);
        hi = std::max(hi, *r.l2_rate);
      }
  }
  o.pass = lo >= 1.5 && hi <= 2.2;
  o.detail = "P1 L2 rates over " + std::to_string(families.size()) + " mesh families, n=10..80, in [" +
             fmt("%.2f", lo) + ", " + fmt("%.2f", hi) + "] (within [1.5, 2.2])";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"P1 smooth-solution convergence table", criterion1},
      {"P2 smooth-solution convergence table", criterion2},
      {"boundary penalty sweep", criterion3},
      {"penalty-free positivity identity", criterion4},
      {"convection-diffusion coercivity bound", criterion5},
      {"boundary correction function", criterion6},
      {"discrete inf-sup constant", criterion7},
      {"interpolant hypotheses", criterion8},
      {"polynomial exactness", criterion9},
      {"outflow layer", criterion10},
      {"L2 rate bracket", criterion11},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
