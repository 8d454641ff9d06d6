#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nitsche {

enum class QuadratureDomain { area, edge };

/// Points are barycentric coordinates. For edge rules the first two
/// components are the weights of the two endpoints and the third is zero.
/// Area weights sum to the reference-triangle area 1/2; edge weights to 1.
template <typename Scalar>
struct QuadratureRuleT {
  QuadratureDomain domain = QuadratureDomain::area;
  std::vector<Eigen::Matrix<Scalar, 3, 1>> points;
  std::vector<Scalar> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

using QuadratureRule = QuadratureRuleT<double>;

/// 12-point symmetric rule, exact for polynomials of degree 6.
template <typename Scalar>
QuadratureRuleT<Scalar> triangle_rule_degree6() {
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  QuadratureRuleT<Scalar> rule;
  rule.domain = QuadratureDomain::area;
  rule.degree = 6;
  auto add_s21 = [&rule](Scalar a, Scalar w) {
    const Scalar b = Scalar(1) - Scalar(2) * a;
    rule.points.push_back(Vec3(b, a, a));
    rule.points.push_back(Vec3(a, b, a));
    rule.points.push_back(Vec3(a, a, b));
    for (int i = 0; i < 3; ++i) rule.weights.push_back(w / Scalar(2));
  };
  add_s21(Scalar(0.2492867451709104212916386L), Scalar(0.1167862757263793660252896L));
  add_s21(Scalar(0.0630890144915022283403316L), Scalar(0.05084490637020681692093681L));
  const Scalar a = Scalar(0.05314504984481694735324967L);
  const Scalar b = Scalar(0.3103524510337844054166077L);
  const Scalar c = Scalar(1) - a - b;
  const Scalar w = Scalar(0.08285107561837357519355346L) / Scalar(2);
  for (const Vec3& p : {Vec3(a, b, c), Vec3(a, c, b), Vec3(b, a, c), Vec3(b, c, a), Vec3(c, a, b), Vec3(c, b, a)}) {
    rule.points.push_back(p);
    rule.weights.push_back(w);
  }
  return rule;
}

/// 4-point Gauss-Legendre rule on [0, 1], exact for degree 7.
template <typename Scalar>
QuadratureRuleT<Scalar> gauss_edge_rule4() {
  using std::sqrt;
  QuadratureRuleT<Scalar> rule;
  rule.domain = QuadratureDomain::edge;
  rule.degree = 7;
  const Scalar r = sqrt(Scalar(6) / Scalar(5));
  const Scalar inner = sqrt(Scalar(3) / Scalar(7) - Scalar(2) / Scalar(7) * r);
  const Scalar outer = sqrt(Scalar(3) / Scalar(7) + Scalar(2) / Scalar(7) * r);
  const Scalar w_inner = (Scalar(18) + sqrt(Scalar(30))) / Scalar(36);
  const Scalar w_outer = (Scalar(18) - sqrt(Scalar(30))) / Scalar(36);
  for (auto [x, w] : {std::pair{-outer, w_outer}, std::pair{-inner, w_inner}, std::pair{inner, w_inner},
                      std::pair{outer, w_outer}}) {
    const Scalar t = (Scalar(1) + x) / Scalar(2);
    rule.points.emplace_back(Scalar(1) - t, t, Scalar(0));
    rule.weights.push_back(w / Scalar(2));
  }
  return rule;
}

/// Rules used throughout assembly and error evaluation. The same degree-6
/// area rule serves k = 1 and k = 2.
const QuadratureRule& quadrature_for(QuadratureDomain purpose, int order);

}  // namespace nitsche
