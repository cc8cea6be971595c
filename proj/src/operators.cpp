#include "bnls/operators.hpp"

#include <cmath>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace bnls {

namespace {

Eigen::FFT<Real> &fft_engine() {
  thread_local Eigen::FFT<Real> fft;
  return fft;
}

template <bool Forward>
void axial_transform(FieldArray &u) {
  const Index n = u.cols();
  std::vector<Complex> scratch(n);
  auto &fft = fft_engine();
  for (Index j = 0; j < u.rows(); ++j) {
    Complex *row = u.row(j).data();
    if constexpr (Forward) {
      fft.fwd(scratch.data(), row, n);
    } else {
      fft.inv(scratch.data(), row, n);
    }
    std::copy(scratch.begin(), scratch.end(), row);
  }
}

}  // namespace

FieldArray apply_radial(const MatrixX &op, const FieldArray &u) {
  const Index rows = u.rows();
  const Index cols = 2 * u.cols();
  FieldArray out(op.rows(), u.cols());
  Eigen::Map<const RowMatrixX> in_view(reinterpret_cast<const Real *>(u.data()),
                                       rows, cols);
  Eigen::Map<RowMatrixX> out_view(reinterpret_cast<Real *>(out.data()),
                                  op.rows(), cols);
  out_view.noalias() = op * in_view;
  return out;
}

void axial_forward(FieldArray &u) { axial_transform<true>(u); }
void axial_inverse(FieldArray &u) { axial_transform<false>(u); }

FieldArray axial_derivative(const Grid &grid, const FieldArray &u, int order) {
  require(order >= 0, "axial_derivative: negative order");
  FieldArray hat = u;
  axial_forward(hat);
  const Complex ik_unit(0.0, 1.0);
  Eigen::Matrix<Complex, 1, Eigen::Dynamic> symbol(grid.n_z);
  for (Index k = 0; k < grid.n_z; ++k) {
    symbol(k) = std::pow(ik_unit * grid.kz(k), order);
  }
  hat.array().rowwise() *= symbol.array();
  axial_inverse(hat);
  return hat;
}

FieldArray radial_derivative(const Grid &grid, const FieldArray &u) {
  return apply_radial(grid.radial->d_r(), u);
}

FieldArray radial_second_derivative(const Grid &grid, const FieldArray &u) {
  return apply_radial(grid.radial->d_rr(), u);
}

FieldArray laplacian(const Grid &grid, const FieldArray &u) {
  FieldArray out = apply_radial(grid.radial->laplacian(), u);
  out += axial_derivative(grid, u, 2);
  return out;
}

Field laplacian(const Field &u) {
  return Field(u.grid, laplacian(*u.grid, u.values));
}

Field bilaplacian(const Field &u) {
  return Field(u.grid, laplacian(*u.grid, laplacian(*u.grid, u.values)));
}

Complex inner_product(const Field &u, const Field &v) {
  const Grid &g = *u.grid;
  const Eigen::Matrix<Complex, Eigen::Dynamic, 1> line =
      u.values.conjugate().cwiseProduct(v.values).rowwise().sum();
  return g.dz * (g.quad_weights.cast<Complex>().transpose() * line)(0);
}

Real integrate(const Field &density_owner, const RealFieldArray &density) {
  return density_owner.grid->integrate(density);
}

FunctionalSnapshot functionals(const Field &u, Real mu, Real sigma,
                               Real nonlinearity) {
  require(sigma > 0.0, "functionals: sigma must be positive");
  const Grid &g = *u.grid;
  FunctionalSnapshot s;
  const RealFieldArray abs2 = u.values.array().abs2();
  s.mass = g.integrate(abs2);
  s.grad_y_sq = g.integrate(radial_derivative(g, u.values).array().abs2());
  s.dz_sq = g.integrate(axial_derivative(g, u.values, 1).array().abs2());
  s.grad_sq = s.grad_y_sq + s.dz_sq;
  s.lap_sq = g.integrate(laplacian(g, u.values).array().abs2());
  s.pot = g.integrate(abs2.pow(sigma + 1.0));
  s.energy = 0.5 * s.lap_sq + 0.5 * mu * s.grad_sq -
             nonlinearity * s.pot / (2.0 * sigma + 2.0);
  return s;
}

FunctionalSnapshot spectral_functionals(const Grid &grid, const FieldArray &u,
                                        Real mu, Real sigma,
                                        Real nonlinearity) {
  require(sigma > 0.0, "spectral_functionals: sigma must be positive");
  FieldArray hat = u;
  axial_forward(hat);
  const RealFieldArray power =
      apply_radial(grid.radial->to_modal(), hat).array().abs2();
  const Real scale = grid.dz / grid.n_z;
  const VectorX radial_sym = -grid.radial->eigenvalues();
  const Eigen::Array<Real, 1, Eigen::Dynamic> k2 =
      grid.kz.array().square().transpose();

  const VectorX by_radial = power.rowwise().sum().matrix();
  const Eigen::Array<Real, 1, Eigen::Dynamic> by_axial = power.colwise().sum();

  FunctionalSnapshot s;
  s.mass = grid.integrate(u.array().abs2());
  s.grad_y_sq = scale * radial_sym.dot(by_radial);
  s.dz_sq = scale * (by_axial * k2).sum();
  s.grad_sq = s.grad_y_sq + s.dz_sq;
  RealFieldArray symbol = radial_sym.array().replicate(1, grid.n_z);
  symbol.rowwise() += k2;
  s.lap_sq = scale * (symbol.square() * power).sum();
  s.pot = grid.integrate(u.array().abs2().pow(sigma + 1.0));
  s.energy = 0.5 * s.lap_sq + 0.5 * mu * s.grad_sq -
             nonlinearity * s.pot / (2.0 * sigma + 2.0);
  return s;
}

Real lp_norm(const Field &u, Real p) {
  require(p >= 1.0, "lp_norm: p must be >= 1");
  return std::pow(u.grid->integrate(u.values.array().abs().pow(p)), 1.0 / p);
}

VectorX axial_mass_profile(const Grid &grid, const FieldArray &u) {
  return grid.integrate_y(u.array().abs2());
}

Real axial_trace_sup(const Field &u) {
  return axial_mass_profile(*u.grid, u.values).maxCoeff();
}

}  // namespace bnls
