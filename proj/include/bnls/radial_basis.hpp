#ifndef BNLS_RADIAL_BASIS_HPP_
#define BNLS_RADIAL_BASIS_HPP_

#include <cmath>
#include <limits>
#include <vector>

#include "bnls/types.hpp"

namespace bnls {

/// Surface area of the unit sphere S^{n-1} in R^n.
Real sphere_area(int n);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(Index n, VectorX &nodes, VectorX &weights);

/*
 * Collocation basis for radial functions on R^dim.
 *
 * A radial function is represented by its samples at the Gauss-Laguerre
 * nodes of the variable x = r^2 / l (weight x^a e^{-x}, a = (dim - 2) / 2),
 * i.e. as an element of span{ e^{-x/2} p(x) : deg p < size }. The length
 * scale l is chosen so that the outermost node sits at r_max.
 *
 * Every integral the operators need (mass, Dirichlet form) is exact on this
 * space, so the discrete Laplacian is exactly self-adjoint with respect to
 * the quadrature weights and negative definite.
 */
class RadialBasis {
 public:
  RadialBasis(int dim, Index size, Real r_max);

  int dim() const noexcept { return dim_; }
  Index size() const noexcept { return nodes_.size(); }
  Real r_max() const noexcept { return r_max_; }
  Real length_scale() const noexcept { return length_scale_; }

  const VectorX &nodes() const noexcept { return nodes_; }
  /// Quadrature weights including the sphere area, sum_j W_j f(r_j) ~
  /// int_{R^dim} f(|y|) dy.
  const VectorX &weights() const noexcept { return weights_; }

  const MatrixX &laplacian() const noexcept { return laplacian_; }
  const MatrixX &d_r() const noexcept { return d_r_; }
  const MatrixX &d_rr() const noexcept { return d_rr_; }

  /// Eigenvalues of laplacian(), non-positive, ordered from the smoothest
  /// mode (closest to zero) to the most oscillatory one.
  const VectorX &eigenvalues() const noexcept { return eigenvalues_; }
  /// Nodal -> modal map; orthogonal in the W-weighted inner product.
  const MatrixX &to_modal() const noexcept { return to_modal_; }
  const MatrixX &from_modal() const noexcept { return from_modal_; }

  /// Evaluates the basis interpolant of `values` at radius r. Returns zero for
  /// r > r_max.
  template <typename Derived>
  typename Derived::Scalar interpolate(const Eigen::MatrixBase<Derived> &values,
                                       Real r) const;

 private:
  int dim_;
  Real r_max_;
  Real length_scale_;
  VectorX x_;
  VectorX log_bary_;
  VectorX bary_sign_;
  VectorX nodes_;
  VectorX weights_;
  MatrixX laplacian_;
  MatrixX d_r_;
  MatrixX d_rr_;
  VectorX eigenvalues_;
  MatrixX to_modal_;
  MatrixX from_modal_;
};

template <typename Derived>
typename Derived::Scalar RadialBasis::interpolate(
    const Eigen::MatrixBase<Derived> &values, Real r) const {
  using Scalar = typename Derived::Scalar;
  if (r > r_max_) return Scalar(0);
  const Real x = r * r / length_scale_;
  const Index n = size();
  // First barycentric form, l(x) sum_j lambda_j e^{(x_j - x)/2} f_j / (x - x_j),
  // with every factor kept in log form.
  Real log_node_poly = 0.0;
  Real node_poly_sign = 1.0;
  for (Index j = 0; j < n; ++j) {
    const Real dx = x - x_(j);
    if (dx == 0.0) return values(j);
    log_node_poly += std::log(std::abs(dx));
    if (dx < 0.0) node_poly_sign = -node_poly_sign;
  }
  Scalar acc(0);
  for (Index j = 0; j < n; ++j) {
    const Real dx = x - x_(j);
    const Real sign = node_poly_sign * bary_sign_(j) * (dx > 0 ? 1.0 : -1.0);
    acc += sign *
           std::exp(log_node_poly + log_bary_(j) - std::log(std::abs(dx)) +
                    0.5 * (x_(j) - x)) *
           values(j);
  }
  return acc;
}

}  // namespace bnls

#endif  // BNLS_RADIAL_BASIS_HPP_
