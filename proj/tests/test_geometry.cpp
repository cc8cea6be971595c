#include <cmath>
#include <numbers>

#include "doctest.h"

#include "bnls/geometry.hpp"

using namespace bnls;

namespace {
constexpr Real pi = std::numbers::pi;
}

TEST_CASE("sphere area and Gauss-Legendre") {
  CHECK(sphere_area(3) == doctest::Approx(4.0 * pi).epsilon(1e-15));
  CHECK(sphere_area(2) == doctest::Approx(2.0 * pi).epsilon(1e-15));
  VectorX x, w;
  gauss_legendre(6, x, w);
  CHECK(w.sum() == doctest::Approx(2.0).epsilon(1e-14));
  // x^10 is integrated exactly by 6 nodes.
  CHECK((w.array() * x.array().pow(10)).sum() ==
        doctest::Approx(2.0 / 11.0).epsilon(1e-13));
}

TEST_CASE("radial basis: Gaussian moments and operators") {
  for (int dim : {3, 4}) {
    RadialBasis b(dim, 256, 12.0);
    const VectorX &r = b.nodes();
    CHECK(r(r.size() - 1) == doctest::Approx(12.0).epsilon(1e-14));
    for (Index j = 1; j < r.size(); ++j) REQUIRE(r(j) > r(j - 1));
    REQUIRE(b.weights().minCoeff() > 0.0);
    // int_{R^dim} r^{2k} e^{-r^2} = |S^{dim-1}| Gamma(k + dim/2) / 2
    for (int k = 0; k < 4; ++k) {
      const VectorX f = r.array().pow(2 * k) * (-r.array().square()).exp();
      const Real exact = 0.5 * sphere_area(dim) * std::tgamma(k + 0.5 * dim);
      CHECK(b.weights().dot(f) == doctest::Approx(exact).epsilon(1e-12));
    }
    const VectorX g = (-0.5 * r.array().square()).exp();
    const VectorX r2 = r.array().square();
    const VectorX lap_exact = (r2.array() - dim) * g.array();
    const VectorX bilap_exact =
        (r2.array().square() - (2 * dim + 4) * r2.array() + dim * (dim + 2)) *
        g.array();
    CHECK((b.laplacian() * g - lap_exact).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((b.laplacian() * (b.laplacian() * g) - bilap_exact)
              .cwiseAbs()
              .maxCoeff() < 1e-5 * bilap_exact.cwiseAbs().maxCoeff());
    const VectorX dg_exact = -r.cwiseProduct(g);
    CHECK((b.d_r() * g - dg_exact).cwiseAbs().maxCoeff() < 1e-8);
    const VectorX d2g_exact = (r2.array() - 1.0) * g.array();
    CHECK((b.d_rr() * g - d2g_exact).cwiseAbs().maxCoeff() < 1e-7);

    CHECK(b.eigenvalues().maxCoeff() < 0.0);
    for (Index i = 1; i < b.size(); ++i) {
      REQUIRE(b.eigenvalues()(i) <= b.eigenvalues()(i - 1));
    }
    const MatrixX id = b.to_modal() * b.from_modal();
    CHECK((id - MatrixX::Identity(b.size(), b.size())).cwiseAbs().maxCoeff() <
          1e-11);
    // W-orthogonality: |to_modal f|^2 = sum W f^2.
    CHECK((b.to_modal() * g).squaredNorm() ==
          doctest::Approx(b.weights().dot(g.cwiseProduct(g))).epsilon(1e-13));
    // Interpolation off the nodes.
    for (Real rr : {0.0, 0.37, 1.5, 4.2}) {
      CHECK(b.interpolate(g, rr) ==
            doctest::Approx(std::exp(-0.5 * rr * rr)).epsilon(1e-10));
    }
    CHECK(b.interpolate(g, 13.0) == 0.0);
  }
}

TEST_CASE("build_grid") {
  const Grid g = build_grid(4, 16.0, 128, 16.0, 128);
  CHECK(g.z_nodes(0) == -16.0);
  CHECK(g.dz == doctest::Approx(0.25));
  CHECK(g.kz(64) == doctest::Approx(-pi * 128 / 32.0));
  CHECK(g.kz(1) == doctest::Approx(2.0 * pi / 32.0));
  // e^{-r^2 - z^2} over R^3 x R is pi^2.
  RealFieldArray dens(g.n_r, g.n_z);
  for (Index j = 0; j < g.n_r; ++j)
    for (Index k = 0; k < g.n_z; ++k)
      dens(j, k) = std::exp(-g.r_nodes(j) * g.r_nodes(j) -
                            g.z_nodes(k) * g.z_nodes(k));
  CHECK(g.integrate(dens) == doctest::Approx(pi * pi).epsilon(1e-10));
  // r^2 e^{-r^2} moment over R^3: 4 pi Gamma(5/2) / 2 = 3 pi^{3/2} / 2.
  const VectorX m = g.r_nodes.array().square() *
                    (-g.r_nodes.array().square()).exp();
  CHECK(g.quad_weights.dot(m) ==
        doctest::Approx(1.5 * std::pow(pi, 1.5)).epsilon(1e-12));

  CHECK_THROWS_AS(build_grid(2, 8.0, 32, 8.0, 32), InvalidArgument);
  CHECK_THROWS_AS(build_grid(4, 8.0, 32, 8.0, 33), InvalidArgument);
  CHECK_THROWS_AS(build_grid(4, 8.0, 8, 8.0, 32), InvalidArgument);
}

TEST_CASE("cutoff jet against finite differences") {
  const Real h = 1e-4;
  for (Real r : {1.3, 2.0, 4.7, 7.1, 8.8}) {
    const auto jet = cutoff_jet(r);
    const auto lo = cutoff_jet(r - h);
    const auto hi = cutoff_jet(r + h);
    for (int k = 0; k < 6; ++k) {
      const Real fd = (hi[k] - lo[k]) / (2.0 * h);
      CHECK(jet[k + 1] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
    for (int n : {3, 4}) {
      const auto laps = cutoff_laplacians(n, r);
      CHECK(laps.lap ==
            doctest::Approx(jet[2] + (n - 1) * jet[1] / r).epsilon(1e-12));
      // Delta^2 psi from finite differences of Delta psi.
      const auto l_lo = cutoff_laplacians(n, r - h);
      const auto l_hi = cutoff_laplacians(n, r + h);
      const Real d1 = (l_hi.lap - l_lo.lap) / (2.0 * h);
      const Real d2 = (l_hi.lap - 2.0 * laps.lap + l_lo.lap) / (h * h);
      CHECK(laps.lap_r == doctest::Approx(d1).epsilon(1e-6).scale(1.0));
      CHECK(laps.bilap ==
            doctest::Approx(d2 + (n - 1) * d1 / r).epsilon(1e-4).scale(1.0));
      const Real b1 = (l_hi.bilap - l_lo.bilap) / (2.0 * h);
      const Real b2 = (l_hi.bilap - 2.0 * laps.bilap + l_lo.bilap) / (h * h);
      CHECK(laps.trilap ==
            doctest::Approx(b2 + (n - 1) * b1 / r).epsilon(1e-4).scale(1.0));
    }
  }
  // Continuity across the bridge ends.
  const auto a = cutoff_jet(1.0 - 1e-9);
  const auto b = cutoff_jet(1.0 + 1e-9);
  for (int k = 0; k < 7; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-6);
  const auto c = cutoff_jet(9.0 - 1e-9);
  const auto e = cutoff_jet(9.0 + 1e-9);
  for (int k = 0; k < 7; ++k) CHECK(std::abs(c[k] - e[k]) < 1e-6);
  CHECK(cutoff_jet(10.0)[0] == cutoff_jet(30.0)[0]);
}

TEST_CASE("build_cutoff and certificate") {
  const Grid g = build_grid(5, 200.0, 512, 8.0, 16);
  for (Real R : {4.0, 8.0, 16.0}) {
    const CutoffProfile p = build_cutoff(g, R);
    CHECK_FALSE(p.truncated);
    const auto cert = certify_cutoff(p, g);
    CHECK(cert.passed);
    CHECK(cert.max_psi_rr <= 1.0 + 1e-14);
    CHECK(cert.min_one_minus_psi_rr >= -1e-12);
    CHECK(cert.min_dim_minus_lap >= -1e-12);
    // Scaling: sup |psi_R^{(k)}| R^{k-2} is independent of R.
    const auto ref = certify_cutoff_dense(5, 1.0, 20000);
    for (int k = 1; k <= 6; ++k) {
      CHECK(cert.sup_dpsi[k - 1] * std::pow(R, k - 2) <=
            ref.sup_dpsi[k - 1] * (1.0 + 1e-9));
    }
    for (Index j = 0; j < g.n_r; ++j) {
      const Real r = g.r_nodes(j);
      REQUIRE(p.psi(j) == doctest::Approx(R * R * cutoff_jet(r / R)[0]).epsilon(1e-12));
      if (r <= R) {
        REQUIRE(p.psi(j) == 0.5 * r * r);
        REQUIRE(1.0 - p.dpsi[1](j) == 0.0);
        REQUIRE(p.lap_psi(j) == 4.0);
      }
      if (r >= 10.0 * R) {
        REQUIRE(p.dpsi[0](j) == 0.0);
        REQUIRE(1.0 - p.dpsi[0](j) / r == 1.0);
      }
    }
    // Axis regularity: Delta psi_R at the first node equals d - 1.
    CHECK(std::abs(p.lap_psi(0) - 4.0) < 1e-6);
  }
  const auto dense = certify_cutoff_dense(5, 4.0, 100000);
  CHECK(dense.passed);
  CHECK(dense.min_one_minus_psi_r_over_r >= 0.0);

  const Real R = 3.0;
  const auto core = cutoff_jet(0.5);
  CHECK(R * R * core[0] == doctest::Approx(R * R / 8.0));
  CHECK(R * cutoff_jet(12.0)[1] == 0.0);
  CHECK(1.0 - core[2] == 0.0);

  const Grid small = build_grid(4, 20.0, 64, 8.0, 16);
  CHECK(build_cutoff(small, 4.0).truncated);
  CHECK_THROWS_AS(build_cutoff(small, -1.0), InvalidArgument);
}
