#include "bnls/radial_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace bnls {

namespace {

using LongReal = long double;

// Orthonormal generalized Laguerre recurrence for the weight x^a e^{-x}:
// b_{k+1} p_{k+1} = (x - a_k) p_k - b_k p_{k-1}.
struct LaguerreRecurrence {
  Real alpha;

  LongReal diag(Index k) const { return 2.0L * k + alpha + 1.0L; }
  LongReal off(Index k) const {
    return std::sqrt(static_cast<LongReal>(k) * (k + alpha));
  }

  // Returns p_n(x) and p_n'(x); optionally accumulates sum_{k<n} p_k(x)^2.
  void evaluate(Index n, LongReal x, LongReal &value, LongReal &derivative,
                LongReal *christoffel = nullptr) const {
    LongReal p_prev = 0.0L;
    LongReal p = 1.0L / std::sqrt(std::tgamma(static_cast<LongReal>(alpha) + 1.0L));
    LongReal dp_prev = 0.0L;
    LongReal dp = 0.0L;
    LongReal sum = 0.0L;
    for (Index k = 0; k < n; ++k) {
      sum += p * p;
      const LongReal b_next = off(k + 1);
      const LongReal p_next = ((x - diag(k)) * p - off(k) * p_prev) / b_next;
      const LongReal dp_next =
          (p + (x - diag(k)) * dp - off(k) * dp_prev) / b_next;
      p_prev = p;
      p = p_next;
      dp_prev = dp;
      dp = dp_next;
    }
    value = p;
    derivative = dp;
    if (christoffel) *christoffel = sum;
  }
};

}  // namespace

Real sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

void gauss_legendre(Index n, VectorX &nodes, VectorX &weights) {
  require(n >= 1, "gauss_legendre: need at least one node");
  VectorX diag = VectorX::Zero(n);
  VectorX sub(std::max<Index>(n - 1, 0));
  for (Index k = 1; k < n; ++k) {
    sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  }
  Eigen::SelfAdjointEigenSolver<MatrixX> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  nodes = solver.eigenvalues();
  weights = 2.0 * solver.eigenvectors().row(0).transpose().array().square();
}

RadialBasis::RadialBasis(int dim, Index size, Real r_max)
    : dim_(dim), r_max_(r_max) {
  require(dim >= 2, "RadialBasis: radial dimension must be >= 2");
  require(size >= 4, "RadialBasis: need at least 4 radial nodes");
  require(r_max > 0.0, "RadialBasis: r_max must be positive");

  const Index n = size;
  const Real alpha = 0.5 * (dim - 2);
  const LaguerreRecurrence rec{alpha};

  // Golub-Welsch for a first guess, then Newton in extended precision.
  VectorX diag(n);
  VectorX sub(n - 1);
  for (Index k = 0; k < n; ++k) diag(k) = static_cast<Real>(rec.diag(k));
  for (Index k = 1; k < n; ++k) sub(k - 1) = static_cast<Real>(rec.off(k));
  Eigen::SelfAdjointEigenSolver<MatrixX> tri;
  tri.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  x_ = tri.eigenvalues();

  VectorX scaled_weights(n);
  for (Index j = 0; j < n; ++j) {
    LongReal x = x_(j);
    LongReal value = 0.0L;
    LongReal derivative = 0.0L;
    for (int it = 0; it < 8; ++it) {
      rec.evaluate(n, x, value, derivative);
      const LongReal step = value / derivative;
      x -= step;
      if (std::abs(step) <= 1e-19L * std::max<LongReal>(1.0L, x)) break;
    }
    LongReal christoffel = 0.0L;
    rec.evaluate(n, x, value, derivative, &christoffel);
    x_(j) = static_cast<Real>(x);
    // Gauss weight times e^{x}: finite even where e^{-x} underflows a double.
    scaled_weights(j) = static_cast<Real>(std::exp(x) / christoffel);
  }
  length_scale_ = r_max * r_max / x_(n - 1);
  nodes_ = (length_scale_ * x_.array()).sqrt().matrix();
  // r^{dim-1} dr = (1/2) l^{a+1} x^a dx.
  weights_ = 0.5 * sphere_area(dim) * std::pow(length_scale_, alpha + 1.0) *
             scaled_weights;

  // Barycentric weights of the polynomial part, kept in log form.
  log_bary_.resize(n);
  bary_sign_.resize(n);
  for (Index i = 0; i < n; ++i) {
    Real acc = 0.0;
    for (Index k = 0; k < n; ++k) {
      if (k != i) acc -= std::log(std::abs(x_(i) - x_(k)));
    }
    log_bary_(i) = acc;
    bary_sign_(i) = ((n - 1 - i) % 2 == 0) ? 1.0 : -1.0;
  }

  // d/dx on span{ e^{-x/2} p }.
  MatrixX dx(n, n);
  for (Index i = 0; i < n; ++i) {
    Real diag_sum = -0.5;
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Real delta = x_(i) - x_(j);
      diag_sum += 1.0 / delta;
      dx(i, j) = bary_sign_(i) * bary_sign_(j) *
                 std::exp(log_bary_(j) - log_bary_(i) - 0.5 * delta) / delta;
    }
    dx(i, i) = diag_sum;
  }

  const VectorX two_r_over_l = 2.0 * nodes_ / length_scale_;
  d_r_ = two_r_over_l.asDiagonal() * dx;
  const MatrixX dx2 = dx * dx;
  d_rr_ = (2.0 / length_scale_) * dx +
          ((4.0 / length_scale_) * x_).asDiagonal() * dx2;

  // Symmetrized Dirichlet form: S = W^{1/2} L W^{-1/2} = -B^T B.
  const VectorX w_sqrt = scaled_weights.cwiseSqrt();
  const VectorX w_inv_sqrt = w_sqrt.cwiseInverse();
  const MatrixX b = std::sqrt(4.0 / length_scale_) *
                    (scaled_weights.cwiseProduct(x_)).cwiseSqrt().asDiagonal() *
                    dx * w_inv_sqrt.asDiagonal();
  MatrixX sym = -(b.transpose() * b);
  sym = 0.5 * (sym + sym.transpose()).eval();
  laplacian_ = w_inv_sqrt.asDiagonal() * sym * w_sqrt.asDiagonal();

  Eigen::SelfAdjointEigenSolver<MatrixX> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("RadialBasis: eigendecomposition failed");
  }
  // Reverse to put the smoothest mode first.
  eigenvalues_ = eig.eigenvalues().reverse();
  const MatrixX q = eig.eigenvectors().rowwise().reverse();
  const VectorX full_sqrt = weights_.cwiseSqrt();
  to_modal_ = q.transpose() * full_sqrt.asDiagonal();
  from_modal_ = full_sqrt.cwiseInverse().asDiagonal() * q;
}

}  // namespace bnls
