#pragma once

#include <array>

#include <Eigen/Dense>

namespace nitsche {

inline constexpr int kMaxLocalDofs = 6;

template <typename Scalar>
using LocalVectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxLocalDofs, 1>;
template <typename Scalar>
using LocalGradientsT = Eigen::Matrix<Scalar, Eigen::Dynamic, 2, 0, kMaxLocalDofs, 2>;

template <typename Scalar>
struct BasisValuesT {
  LocalVectorT<Scalar> values;
  LocalGradientsT<Scalar> gradients;  // physical gradients, one row per local dof
  LocalVectorT<Scalar> laplacians;
};

/// Lagrange basis of order 1 or 2 on an affine triangle, evaluated from
/// barycentric coordinates and the (constant) physical gradients of the
/// barycentric functions. Local dofs: vertices 0..2, then for P2 the
/// midpoint of the edge opposite vertex i as dof 3 + i.
template <typename Scalar>
BasisValuesT<Scalar> lagrange_basis(int order, const Eigen::Matrix<Scalar, 3, 1>& bary,
                                    const std::array<Eigen::Matrix<Scalar, 2, 1>, 3>& grad_lambda) {
  BasisValuesT<Scalar> out;
  if (order == 1) {
    out.values = bary;
    out.gradients.resize(3, 2);
    for (int i = 0; i < 3; ++i) out.gradients.row(i) = grad_lambda[i].transpose();
    out.laplacians = LocalVectorT<Scalar>::Zero(3);
    return out;
  }
  out.values.resize(6);
  out.gradients.resize(6, 2);
  out.laplacians.resize(6);
  for (int i = 0; i < 3; ++i) {
    const Scalar l = bary(i);
    const auto& g = grad_lambda[i];
    out.values(i) = l * (Scalar(2) * l - Scalar(1));
    out.gradients.row(i) = ((Scalar(4) * l - Scalar(1)) * g).transpose();
    out.laplacians(i) = Scalar(4) * g.squaredNorm();
  }
  for (int i = 0; i < 3; ++i) {
    const int a = (i + 1) % 3, b = (i + 2) % 3;
    const auto& ga = grad_lambda[a];
    const auto& gb = grad_lambda[b];
    out.values(3 + i) = Scalar(4) * bary(a) * bary(b);
    out.gradients.row(3 + i) = (Scalar(4) * (bary(b) * ga + bary(a) * gb)).transpose();
    out.laplacians(3 + i) = Scalar(8) * ga.dot(gb);
  }
  return out;
}

}  // namespace nitsche
