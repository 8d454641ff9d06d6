#include "nitsche/quadrature.hpp"

#include <stdexcept>

namespace nitsche {

const QuadratureRule& quadrature_for(QuadratureDomain purpose, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("quadrature_for: order must be 1 or 2");
  static const QuadratureRule area = triangle_rule_degree6<double>();
  static const QuadratureRule edge = gauss_edge_rule4<double>();
  return purpose == QuadratureDomain::area ? area : edge;
}

}  // namespace nitsche
