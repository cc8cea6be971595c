#include "bnls/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace bnls {

namespace {

constexpr Real kBridgeStart = 1.0;
constexpr Real kBridgeWidth = 8.0;
constexpr Real kBridgeEnd = kBridgeStart + kBridgeWidth;
constexpr Real kSmoothstepScale = 12012.0;  // 13! / (6! 6!)

Real binomial(int n, int k) {
  Real b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// m-th derivative of g(t) = t^6 (1 - t)^6.
Real bump_derivative(int m, Real t) {
  Real sign = 1.0;
  if (t > 0.5) {
    t = 1.0 - t;
    if (m % 2 == 1) sign = -1.0;
  }
  Real acc = 0.0;
  for (int i = 0; i <= 6; ++i) {
    const int p = 6 + i;
    if (p < m) continue;
    Real falling = 1.0;
    for (int q = 0; q < m; ++q) falling *= p - q;
    acc += ((i % 2 == 0) ? 1.0 : -1.0) * binomial(6, i) * falling *
           std::pow(t, p - m);
  }
  return sign * acc;
}

// Regularized incomplete beta I_t(7, 7).
Real smoothstep(Real t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const bool flip = t > 0.5;
  const Real s = flip ? 1.0 - t : t;
  Real acc = 0.0;
  for (int k = 7; k <= 13; ++k) {
    acc += binomial(13, k) * std::pow(s, k) * std::pow(1.0 - s, 13 - k);
  }
  return flip ? 1.0 - acc : acc;
}

// chi^{(j)}(r), j = 0..5, where psi'(r) = r chi(r).
std::array<Real, 6> chi_jet(Real r) {
  std::array<Real, 6> chi{};
  if (r <= kBridgeStart) {
    chi[0] = 1.0;
    return chi;
  }
  if (r >= kBridgeEnd) return chi;
  const Real t = (r - kBridgeStart) / kBridgeWidth;
  chi[0] = 1.0 - smoothstep(t);
  Real scale = 1.0 / kBridgeWidth;
  for (int j = 1; j < 6; ++j) {
    chi[j] = -kSmoothstepScale * bump_derivative(j - 1, t) * scale;
    scale /= kBridgeWidth;
  }
  return chi;
}

Real bridge_integral(Real r) {
  static const auto rule = [] {
    std::pair<VectorX, VectorX> nw;
    gauss_legendre(10, nw.first, nw.second);
    return nw;
  }();
  const Real half = 0.5 * (r - kBridgeStart);
  const Real mid = 0.5 * (r + kBridgeStart);
  Real acc = 0.0;
  for (Index q = 0; q < rule.first.size(); ++q) {
    const Real t = mid + half * rule.first(q);
    acc += rule.second(q) * t * chi_jet(t)[0];
  }
  return half * acc;
}

// (Delta f)^{(j)}, j = 0..K-2, from the jet f^{(0..K)} of a radial function.
template <std::size_t K>
std::array<Real, K - 2> laplacian_jet(int n, Real r,
                                      const std::array<Real, K> &f) {
  std::array<Real, K - 2> out{};
  for (std::size_t j = 0; j + 2 < K; ++j) {
    Real acc = f[j + 2];
    Real inv_pow_fact = 1.0;  // (-1)^m m! / r^{m+1} built incrementally
    for (std::size_t m = 0; m <= j; ++m) {
      if (m == 0) {
        inv_pow_fact = 1.0 / r;
      } else {
        inv_pow_fact *= -static_cast<Real>(m) / r;
      }
      const std::size_t i = j - m;
      acc += (n - 1) * binomial(static_cast<int>(j), static_cast<int>(i)) *
             f[i + 1] * inv_pow_fact;
    }
    out[j] = acc;
  }
  return out;
}

}  // namespace

std::array<Real, 7> cutoff_jet(Real r) {
  std::array<Real, 7> psi{};
  if (r <= kBridgeStart) {
    psi[0] = 0.5 * r * r;
    psi[1] = r;
    psi[2] = 1.0;
    return psi;
  }
  const Real r_eval = std::min(r, kBridgeEnd);
  psi[0] = 0.5 + bridge_integral(r_eval);
  if (r >= kBridgeEnd) return psi;
  const auto chi = chi_jet(r);
  psi[1] = r * chi[0];
  for (int k = 2; k <= 6; ++k) {
    psi[k] = r * chi[k - 1] + (k - 1) * chi[k - 2];
  }
  return psi;
}

CutoffLaplacians cutoff_laplacians(int n, Real r) {
  CutoffLaplacians out;
  if (r <= kBridgeStart) {
    out.lap = n;
    return out;
  }
  if (r >= kBridgeEnd) return out;
  const auto psi = cutoff_jet(r);
  const auto lap = laplacian_jet<7>(n, r, psi);
  const auto bilap = laplacian_jet<5>(n, r, lap);
  const auto trilap = laplacian_jet<3>(n, r, bilap);
  out.lap = lap[0];
  out.lap_r = lap[1];
  out.lap_rr = lap[2];
  out.bilap = bilap[0];
  out.trilap = trilap[0];
  return out;
}

Grid build_grid(int d, Real r_max, Index n_r, Real z_max, Index n_z) {
  require(d >= 3, "build_grid: d must be >= 3");
  require(n_r >= 16, "build_grid: n_r must be >= 16");
  require(n_z >= 16, "build_grid: n_z must be >= 16");
  require(n_z % 2 == 0, "build_grid: n_z must be even");
  require(r_max > 0.0, "build_grid: r_max must be positive");
  require(z_max > 0.0, "build_grid: z_max must be positive");

  Grid g;
  g.d = d;
  g.n_r = n_r;
  g.r_max = r_max;
  g.n_z = n_z;
  g.z_max = z_max;
  g.radial = std::make_shared<const RadialBasis>(d - 1, n_r, r_max);
  g.r_nodes = g.radial->nodes();
  g.quad_weights = g.radial->weights();

  g.dz = 2.0 * z_max / n_z;
  g.z_nodes.resize(n_z);
  g.kz.resize(n_z);
  const Real dk = std::numbers::pi / z_max;
  for (Index k = 0; k < n_z; ++k) {
    g.z_nodes(k) = -z_max + k * g.dz;
    g.kz(k) = (k < n_z / 2 ? k : k - n_z) * dk;
  }
  return g;
}

CutoffProfile build_cutoff(const Grid &grid, Real R) {
  require(R > 0.0, "build_cutoff: R must be positive");
  const Index n = grid.n_r;
  const int dim = grid.d - 1;
  CutoffProfile p;
  p.R = R;
  p.d = grid.d;
  p.truncated = 10.0 * R > grid.r_max;
  p.psi.resize(n);
  for (auto &v : p.dpsi) v.resize(n);
  p.lap_psi.resize(n);
  p.lap_psi_rr.resize(n);
  p.bilap_psi.resize(n);
  p.trilap_psi.resize(n);

  for (Index j = 0; j < n; ++j) {
    const Real s = grid.r_nodes(j) / R;
    const auto jet = cutoff_jet(s);
    const auto laps = cutoff_laplacians(dim, s);
    p.psi(j) = R * R * jet[0];
    Real scale = R;
    for (int k = 1; k <= 6; ++k) {
      p.dpsi[k - 1](j) = scale * jet[k];
      scale /= R;
    }
    p.lap_psi(j) = laps.lap;
    p.lap_psi_rr(j) = laps.lap_rr / (R * R);
    p.bilap_psi(j) = laps.bilap / (R * R);
    p.trilap_psi(j) = laps.trilap / (R * R * R * R);
  }
  p.phi_grad_r = p.dpsi[0];
  p.phi_grad_z = grid.z_nodes;

  const auto cert = certify_cutoff(p, grid);
  if (!cert.passed) {
    throw NumericalError("build_cutoff: sign conditions violated");
  }
  return p;
}

namespace {

CutoffCertificate certify_samples(const VectorX &r, const VectorX &dpsi1,
                                  const VectorX &dpsi2, const VectorX &lap,
                                  const std::array<VectorX, 6> *all, int dim) {
  CutoffCertificate c;
  c.min_one_minus_psi_rr = (1.0 - dpsi2.array()).minCoeff();
  c.min_one_minus_psi_r_over_r = (1.0 - dpsi1.array() / r.array()).minCoeff();
  c.min_dim_minus_lap = (dim - lap.array()).minCoeff();
  c.max_psi_rr = dpsi2.maxCoeff();
  if (all) {
    for (int k = 0; k < 6; ++k) c.sup_dpsi[k] = (*all)[k].cwiseAbs().maxCoeff();
  }
  constexpr Real tol = -1e-12;
  c.passed = c.min_one_minus_psi_rr >= tol &&
             c.min_one_minus_psi_r_over_r >= tol && c.min_dim_minus_lap >= tol;
  return c;
}

}  // namespace

CutoffCertificate certify_cutoff(const CutoffProfile &profile,
                                 const Grid &grid) {
  auto c = certify_samples(grid.r_nodes, profile.dpsi[0], profile.dpsi[1],
                           profile.lap_psi, &profile.dpsi, grid.d - 1);
  c.truncated = profile.truncated;
  return c;
}

CutoffCertificate certify_cutoff_dense(int d, Real R, Index samples,
                                       Real r_end) {
  require(samples >= 2, "certify_cutoff_dense: need >= 2 samples");
  if (r_end <= 0.0) r_end = 12.0 * R;
  VectorX r(samples);
  VectorX d1(samples);
  VectorX d2(samples);
  VectorX lap(samples);
  std::array<VectorX, 6> all;
  for (auto &v : all) v.resize(samples);
  for (Index j = 0; j < samples; ++j) {
    r(j) = r_end * (j + 1) / samples;
    const Real s = r(j) / R;
    const auto jet = cutoff_jet(s);
    Real scale = R;
    for (int k = 1; k <= 6; ++k) {
      all[k - 1](j) = scale * jet[k];
      scale /= R;
    }
    d1(j) = all[0](j);
    d2(j) = all[1](j);
    lap(j) = cutoff_laplacians(d - 1, s).lap;
  }
  return certify_samples(r, d1, d2, lap, &all, d - 1);
}

void write_cutoff_csv(std::ostream &os, const CutoffProfile &profile,
                      const Grid &grid) {
  os << "r,psi,dpsi,d2psi,lap_psi,bilap_psi,trilap_psi\n";
  os.precision(17);
  for (Index j = 0; j < grid.n_r; ++j) {
    os << grid.r_nodes(j) << ',' << profile.psi(j) << ',' << profile.dpsi[0](j)
       << ',' << profile.dpsi[1](j) << ',' << profile.lap_psi(j) << ','
       << profile.bilap_psi(j) << ',' << profile.trilap_psi(j) << '\n';
  }
}

}  // namespace bnls
