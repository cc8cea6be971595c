#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "bnls/initial_conditions.hpp"
#include "bnls/operators.hpp"

using namespace bnls;

namespace {

constexpr Real pi = std::numbers::pi;

std::shared_ptr<const Grid> grid4(Index n = 192, Real r_max = 14.0,
                                  Real z_max = 14.0) {
  return std::make_shared<const Grid>(build_grid(4, r_max, n, z_max, n));
}

}  // namespace

TEST_CASE("Gaussian Laplacian and bilaplacian") {
  auto g = grid4();
  const Field u = gaussian_field(g, 1.0, 1.0);
  const Field lap = laplacian(u);
  const Field bilap = bilaplacian(u);
  Real lap_err = 0.0;
  Real bilap_err = 0.0;
  Real bilap_max = 0.0;
  for (Index j = 0; j < g->n_r; ++j) {
    for (Index k = 0; k < g->n_z; ++k) {
      const Real x2 = g->r_nodes(j) * g->r_nodes(j) + g->z_nodes(k) * g->z_nodes(k);
      const Real e = std::exp(-0.5 * x2);
      lap_err = std::max(lap_err, std::abs(lap.values(j, k) - (x2 - 4.0) * e));
      const Real exact = (x2 * x2 - 12.0 * x2 + 24.0) * e;
      bilap_err = std::max(bilap_err, std::abs(bilap.values(j, k) - exact));
      bilap_max = std::max(bilap_max, std::abs(exact));
    }
  }
  CHECK(lap_err < 1e-6);
  CHECK(bilap_err / bilap_max < 1e-4);
}

TEST_CASE("axial plane wave and flat window") {
  auto g = grid4(96, 12.0, 12.0);
  const Real k = 3.0 * pi / g->z_max;
  FieldArray u(g->n_r, g->n_z);
  for (Index j = 0; j < g->n_r; ++j)
    for (Index m = 0; m < g->n_z; ++m)
      u(j, m) = std::exp(Complex(0.0, k * g->z_nodes(m))) *
                std::exp(-0.5 * g->r_nodes(j) * g->r_nodes(j));
  const FieldArray uzz = axial_derivative(*g, u, 2);
  CHECK((uzz + k * k * u).cwiseAbs().maxCoeff() < 1e-11);
  const FieldArray uzzzz = axial_derivative(*g, u, 4);
  CHECK((uzzzz - std::pow(k, 4) * u).cwiseAbs().maxCoeff() < 1e-9);

  // Flat-top window: Delta vanishes in the interior.
  Field w(g);
  for (Index j = 0; j < g->n_r; ++j)
    for (Index m = 0; m < g->n_z; ++m)
      w.values(j, m) = 0.25 * std::erfc((g->r_nodes(j) - 6.0) / 0.8) *
                       std::erfc((std::abs(g->z_nodes(m)) - 6.0) / 0.8);
  const Field lw = laplacian(w);
  Real interior = 0.0;
  for (Index j = 0; j < g->n_r; ++j)
    for (Index m = 0; m < g->n_z; ++m)
      if (g->r_nodes(j) < 2.5 && std::abs(g->z_nodes(m)) < 2.5)
        interior = std::max(interior, std::abs(lw.values(j, m)));
  CHECK(interior < 1e-6);
}

TEST_CASE("Gaussian functionals in d = 4") {
  auto g = grid4();
  const Field u = gaussian_field(g, 1.0, 1.0);
  const auto s = functionals(u, 0.0, 1.0);
  CHECK(s.mass == doctest::Approx(pi * pi).epsilon(1e-10));
  CHECK(s.lap_sq == doctest::Approx(6.0 * pi * pi).epsilon(1e-8));
  CHECK(s.grad_sq == doctest::Approx(2.0 * pi * pi).epsilon(1e-9));
  CHECK(s.grad_y_sq == doctest::Approx(1.5 * pi * pi).epsilon(1e-9));
  CHECK(s.pot == doctest::Approx(pi * pi / 4.0).epsilon(1e-10));

  const auto s7 = functionals(gaussian_field(g, 7.0, 1.0), 0.0, 1.0);
  CHECK(std::abs(s7.energy + 3.0625 * pi * pi) < 1e-4);
  CHECK(s7.energy ==
        doctest::Approx(0.5 * s7.lap_sq - s7.pot / 4.0).epsilon(1e-15));

  const auto spec = spectral_functionals(*g, u.values, 0.3, 1.0);
  const auto nodal = functionals(u, 0.3, 1.0);
  CHECK(spec.lap_sq == doctest::Approx(nodal.lap_sq).epsilon(1e-11));
  CHECK(spec.grad_y_sq == doctest::Approx(nodal.grad_y_sq).epsilon(1e-11));
  CHECK(spec.dz_sq == doctest::Approx(nodal.dz_sq).epsilon(1e-11));
  CHECK(spec.energy == doctest::Approx(nodal.energy).epsilon(1e-11));

  CHECK(lp_norm(u, 2.0) == doctest::Approx(pi).epsilon(1e-10));
  CHECK(lp_norm(u, 4.0) == doctest::Approx(std::sqrt(pi / 2.0)).epsilon(1e-10));
  Field v = u;
  v.values *= Complex(-2.0, 1.5);
  CHECK(lp_norm(v, 3.0) == doctest::Approx(2.5 * lp_norm(u, 3.0)).epsilon(1e-13));
  CHECK_THROWS_AS(lp_norm(u, 0.5), InvalidArgument);
}

TEST_CASE("axial trace supremum") {
  auto g = grid4(128, 12.0, 10.0);
  const Field u = gaussian_field(g, 1.0, 1.0);
  CHECK(axial_trace_sup(u) == doctest::Approx(std::pow(pi, 1.5)).epsilon(1e-10));

  // Separable f(r) g(z).
  Field s(g);
  Real gmax = 0.0;
  for (Index j = 0; j < g->n_r; ++j)
    for (Index k = 0; k < g->n_z; ++k) {
      const Real z = g->z_nodes(k);
      const Real gz = (1.0 + 0.5 * z) * std::exp(-z * z / 3.0);
      if (j == 0) gmax = std::max(gmax, gz * gz);
      s.values(j, k) = std::exp(-g->r_nodes(j) * g->r_nodes(j)) * gz;
    }
  const Real f_norm = 0.5 * sphere_area(3) * std::tgamma(1.5) / std::pow(2.0, 1.5);
  CHECK(axial_trace_sup(s) == doctest::Approx(f_norm * gmax).epsilon(1e-10));

  // Translation by whole grid cells.
  Field t(g);
  t.values.leftCols(g->n_z - 7) = s.values.rightCols(g->n_z - 7);
  t.values.rightCols(7) = s.values.leftCols(7);
  CHECK(axial_trace_sup(t) == doctest::Approx(axial_trace_sup(s)).epsilon(1e-14));
  CHECK(functionals(t, 0.0, 1.0).mass ==
        doctest::Approx(functionals(s, 0.0, 1.0).mass).epsilon(1e-14));
}

TEST_CASE("discrete integration by parts on random fields") {
  auto g = grid4(64, 12.0, 12.0);
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const Field u = random_field(g, rng);
    const Field v = random_field(g, rng);
    const Field lu = laplacian(u);
    const Field lv = laplacian(v);
    const Complex a = inner_product(lu, v);
    const Complex b = inner_product(u, lv);
    CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
    const Real l2 = inner_product(lu, lu).real();
    CHECK(inner_product(bilaplacian(u), u).real() ==
          doctest::Approx(l2).epsilon(1e-10));
    const auto s = functionals(u, 0.0, 1.0);
    CHECK(s.grad_sq == doctest::Approx(-inner_product(lu, u).real()).epsilon(1e-10));
    CHECK(s.grad_sq == doctest::Approx(s.grad_y_sq + s.dz_sq).epsilon(1e-14));
    CHECK(axial_trace_sup(u) <= 2.0 * std::sqrt(s.mass * s.dz_sq) * (1.0 + 1e-8));
  }
}
