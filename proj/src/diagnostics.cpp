#include "bnls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace bnls {

namespace {

// A u = psi_R'(r) d_r u + z d_z u
FieldArray virial_generator(const Grid &g, const FieldArray &u,
                            const CutoffProfile &p) {
  FieldArray out = p.phi_grad_r.asDiagonal() * radial_derivative(g, u);
  out += axial_derivative(g, u, 1) * g.z_nodes.asDiagonal();
  return out;
}

Real im_inner(const Grid &g, const FieldArray &u, const FieldArray &v) {
  const RealFieldArray dens = (u.conjugate().cwiseProduct(v)).imag().array();
  return g.integrate(dens);
}

VectorX weighted_by(const VectorX &w, const VectorX &f) { return w.cwiseProduct(f); }

}  // namespace

Real virial(const Field &u, const CutoffProfile &profile) {
  const Grid &g = *u.grid;
  require(profile.psi.size() == g.n_r, "virial: profile does not match grid");
  return 2.0 * im_inner(g, u.values, virial_generator(g, u.values, profile));
}

FieldArray time_derivative(const Field &u, Real mu, Real sigma,
                           Real nonlinearity) {
  const Grid &g = *u.grid;
  const FieldArray lap = laplacian(g, u.values);
  FieldArray h = laplacian(g, lap) - mu * lap;
  if (nonlinearity != 0.0) {
    h.array() -= nonlinearity * u.values.array().abs2().pow(sigma).cast<Complex>() *
                 u.values.array();
  }
  return Complex(0.0, -1.0) * h;
}

Real virial_rate(const Field &u, const CutoffProfile &profile, Real mu,
                 Real sigma, Real nonlinearity) {
  const Grid &g = *u.grid;
  const FieldArray ut = time_derivative(u, mu, sigma, nonlinearity);
  const FieldArray au = virial_generator(g, u.values, profile);
  const FieldArray aut = virial_generator(g, ut, profile);
  return 2.0 * (im_inner(g, ut, au) + im_inner(g, u.values, aut));
}

Real x_mu(const Field &u, const CutoffProfile &profile, Real mu) {
  if (mu == 0.0) return 0.0;
  const Grid &g = *u.grid;
  const VectorX weight = (1.0 - profile.dpsi[1].array()).matrix();
  const RealFieldArray dens =
      weight.asDiagonal() * radial_derivative(g, u.values).cwiseAbs2();
  return -4.0 * mu * g.integrate(dens);
}

ErrorTerms error_terms(const FunctionalSnapshot &s, Real R, int d, Real sigma,
                       Real mu) {
  ErrorTerms e;
  e.terms[0] = std::pow(R, -4.0) * s.mass;
  e.terms[1] = std::pow(R, -2.0) * s.grad_sq;
  e.terms[2] = std::pow(R, -sigma * (d - 2)) * s.mass * std::pow(s.grad_sq, sigma);
  e.terms[3] = std::abs(mu) * std::pow(R, -2.0) * s.mass;
  return e;
}

Real virial_main_term(const FunctionalSnapshot &s, int d, Real sigma, Real mu,
                      Real nonlinearity) {
  return 8.0 * s.lap_sq + 4.0 * mu * s.grad_sq -
         nonlinearity * 2.0 * d * sigma / (sigma + 1.0) * s.pot;
}

Real virial_main_term_e0(const FunctionalSnapshot &s, Real energy0, int d,
                         Real sigma, Real mu) {
  const Real k = 2.0 * d * sigma;
  return 2.0 * k * energy0 - (k - 8.0) * s.lap_sq - mu * (k - 4.0) * s.grad_sq;
}

std::vector<VirialReport> virial_samples(const Field &u, const FunctionalSnapshot &s,
                                         const std::vector<CutoffProfile> &profiles,
                                         Real mu, Real sigma, Real energy0, Real C,
                                         Real nonlinearity) {
  const Grid &g = *u.grid;
  const int d = g.d;
  const FieldArray ut = time_derivative(u, mu, sigma, nonlinearity);
  const FieldArray ur = radial_derivative(g, u.values);
  const FieldArray utr = radial_derivative(g, ut);
  const FieldArray uz = axial_derivative(g, u.values, 1) * g.z_nodes.asDiagonal();
  const FieldArray utz = axial_derivative(g, ut, 1) * g.z_nodes.asDiagonal();
  const FieldArray ubar = u.values.conjugate();
  // Everything is linear in psi_R', so reduce over z once.
  auto per_r = [&](const RealFieldArray &dens) {
    return VectorX(g.dz * g.quad_weights.cwiseProduct(dens.rowwise().sum().matrix()));
  };
  const VectorX m_r = per_r(ubar.cwiseProduct(ur).imag().array());
  const VectorX rate_r =
      per_r((ut.conjugate().cwiseProduct(ur) + ubar.cwiseProduct(utr)).imag().array());
  const VectorX grad_r = per_r(ur.cwiseAbs2().array());
  const Real m_z = g.integrate(ubar.cwiseProduct(uz).imag().array());
  const Real rate_z =
      g.integrate((ut.conjugate().cwiseProduct(uz) + ubar.cwiseProduct(utz)).imag().array());

  std::vector<VirialReport> out;
  for (const CutoffProfile &p : profiles) {
    require(p.psi.size() == g.n_r, "virial_samples: profile does not match grid");
    VirialReport r;
    r.t = s.time;
    r.M_phi = 2.0 * (p.phi_grad_r.dot(m_r) + m_z);
    r.dMdt_instant = 2.0 * (p.phi_grad_r.dot(rate_r) + rate_z);
    r.rhs_main = virial_main_term(s, d, sigma, mu, nonlinearity);
    r.rhs_main_e0 = virial_main_term_e0(s, energy0, d, sigma, mu);
    r.X_mu = mu == 0.0 ? 0.0 : -4.0 * mu * (1.0 - p.dpsi[1].array()).matrix().dot(grad_r);
    r.err_terms = error_terms(s, p.R, d, sigma, mu);
    r.C = C;
    r.rhs_total = r.rhs_main + r.X_mu + C * r.err_terms.sum();
    out.push_back(r);
  }
  return out;
}

std::vector<Real> virial_values(const Field &u, const std::vector<CutoffProfile> &profiles) {
  const Grid &g = *u.grid;
  const FieldArray ur = radial_derivative(g, u.values);
  const FieldArray uz = axial_derivative(g, u.values, 1) * g.z_nodes.asDiagonal();
  const FieldArray ubar = u.values.conjugate();
  const VectorX m_r = g.dz * g.quad_weights.cwiseProduct(
                                 ubar.cwiseProduct(ur).imag().rowwise().sum().matrix());
  const Real m_z = g.integrate(ubar.cwiseProduct(uz).imag().array());
  std::vector<Real> out;
  for (const CutoffProfile &p : profiles) {
    require(p.psi.size() == g.n_r, "virial_values: profile does not match grid");
    out.push_back(2.0 * (p.phi_grad_r.dot(m_r) + m_z));
  }
  return out;
}

std::vector<Real> splitting_rate_bias(const Field &u,
                                      const std::vector<CutoffProfile> &profiles,
                                      Real mu, Real sigma, Real nonlinearity, Real dt) {
  require(dt > 0.0, "splitting_rate_bias: dt must be positive");
  if (nonlinearity == 0.0) return std::vector<Real>(profiles.size(), 0.0);
  FieldArray one = u.values;
  strang_step(one, LinearPropagator(u.grid, mu, dt), sigma, nonlinearity);
  FieldArray two = u.values;
  strang_steps(two, LinearPropagator(u.grid, mu, 0.5 * dt), sigma, nonlinearity, 2);
  const auto m1 = virial_values(Field(u.grid, std::move(one)), profiles);
  const auto m2 = virial_values(Field(u.grid, std::move(two)), profiles);
  std::vector<Real> out(profiles.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 4.0 / 3.0 * (m1[i] - m2[i]) / dt;
  return out;
}

VirialReport virial_sample(const Field &u, const FunctionalSnapshot &s,
                           const CutoffProfile &profile, Real mu, Real sigma,
                           Real energy0, Real C, Real nonlinearity) {
  return virial_samples(u, s, {profile}, mu, sigma, energy0, C, nonlinearity).front();
}

void finalize_virial_series(VirialSeries &series) {
  require(series.reports.size() >= 3,
          "finalize_virial_series: needs at least 3 samples");
  const std::size_t n = series.reports.size();
  std::vector<Real> t(n);
  std::vector<Real> m(n);
  std::vector<Real> rate(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = series.reports[i].t;
    m[i] = series.reports[i].M_phi;
    rate[i] = series.reports[i].dMdt_instant;
  }
  series.interior_violations = 0;
  Real m_scale = 0.0;
  for (Real v : m) m_scale = std::max(m_scale, std::abs(v));
  // Third derivative of M at interior samples from the exact rates.
  std::vector<Real> third(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Real h1 = t[i] - t[i - 1];
    const Real h2 = t[i + 1] - t[i];
    third[i] = 2.0 * ((rate[i + 1] - rate[i]) / h2 - (rate[i] - rate[i - 1]) / h1) / (h1 + h2);
  }
  for (std::size_t i = 0; i < n; ++i) {
    VirialReport &r = series.reports[i];
    if (i == 0 || i + 1 == n) {
      const std::size_t a = i == 0 ? 0 : n - 2;
      const Real h = t[a + 1] - t[a];
      r.dMdt_numeric = (m[a + 1] - m[a]) / h;
      // One-sided: |M''| h / 2 with M'' from the rates.
      r.tol_fd = std::abs(rate[a + 1] - rate[a]) + 1e-11 * m_scale / h;
      r.tol_split = std::max(std::abs(series.reports[a].split_bias),
                             std::abs(series.reports[a + 1].split_bias));
    } else {
      r.interior = true;
      const Real h1 = t[i] - t[i - 1];
      const Real h2 = t[i + 1] - t[i];
      r.dMdt_numeric = (h1 * h1 * m[i + 1] - h2 * h2 * m[i - 1] -
                        (h1 * h1 - h2 * h2) * m[i]) /
                       (h1 * h2 * (h1 + h2));
      // Leading error h1 h2 M''' / 6. The sampled M''' can cross zero inside
      // the stencil, so take the largest of the neighbouring values, doubled.
      Real m3 = std::abs(third[i]);
      if (i > 1) m3 = std::max(m3, std::abs(third[i - 1]));
      if (i + 2 < n) m3 = std::max(m3, std::abs(third[i + 1]));
      r.tol_fd = 2.0 * h1 * h2 * m3 / 6.0 + 1e-11 * m_scale * (1.0 / h1 + 1.0 / h2);
      r.tol_split = std::max({std::abs(series.reports[i - 1].split_bias), std::abs(r.split_bias),
                              std::abs(series.reports[i + 1].split_bias)});
    }
    r.margin = r.rhs_total + r.tol_fd + r.tol_split - r.dMdt_numeric;
    r.holds = r.margin >= 0.0;
    if (r.interior && !r.holds) ++series.interior_violations;
  }
}

VirialSeries virial_rate_report(const Trajectory &traj,
                                std::shared_ptr<const Grid> grid,
                                const CutoffProfile &profile, Real mu,
                                Real sigma, Real energy0, Real C,
                                Real nonlinearity) {
  require(traj.fields.size() >= 3,
          "virial_rate_report: needs at least 3 stored fields; enable field "
          "storage (field_every > 0) for virial sampling");
  VirialSeries series;
  series.R = profile.R;
  for (const StoredField &f : traj.fields) {
    const Field u(grid, f.values);
    FunctionalSnapshot s = traj.snapshots.at(f.snapshot);
    s.time = f.t;
    VirialReport r = virial_sample(u, s, profile, mu, sigma, energy0, C, nonlinearity);
    r.snapshot = f.snapshot;
    series.reports.push_back(r);
  }
  finalize_virial_series(series);
  return series;
}

Real calibrate_virial_constant(const std::vector<Field> &family,
                               const std::vector<Real> &radii, Real mu,
                               Real sigma, Real nonlinearity) {
  Real c = 0.0;
  for (const Field &u : family) {
    const Grid &g = *u.grid;
    const auto s = functionals(u, mu, sigma);
    for (Real R : radii) {
      const CutoffProfile p = build_cutoff(g, R);
      const Real excess = virial_rate(u, p, mu, sigma, nonlinearity) -
                          virial_main_term(s, g.d, sigma, mu, nonlinearity) -
                          x_mu(u, p, mu);
      const Real err = error_terms(s, R, g.d, sigma, mu).sum();
      if (err > 0.0) c = std::max(c, excess / err);
    }
  }
  return c;
}

MassCriticalReport mass_critical_report(const Field &u,
                                        const CutoffProfile &profile, Real E0,
                                        Real sigma, Real eta) {
  const Grid &g = *u.grid;
  const int d = g.d;
  require(d >= 4, "mass_critical_report: needs d >= 4");
  require(std::abs(sigma - 4.0 / d) < 1e-12,
          "mass_critical_report: sigma must equal 4/d (mass-critical)");
  require(eta > 0.0, "mass_critical_report: eta must be positive");
  const Real R = profile.R;
  const VectorX a_r = 4.0 * profile.lap_psi_rr + 2.0 * profile.bilap_psi;
  const VectorX b_r = (8.0 / (d + 4.0)) * ((d - 1.0) - profile.lap_psi.array()).matrix();
  const VectorX one_minus = (1.0 - profile.dpsi[1].array()).matrix();

  const RealFieldArray abs2 = u.values.array().abs2();
  const RealFieldArray ur2 = radial_derivative(g, u.values).cwiseAbs2().array();
  const RealFieldArray urr2 = radial_second_derivative(g, u.values).cwiseAbs2().array();

  MassCriticalReport rep;
  rep.eta = eta;
  rep.A_R_term = g.integrate(a_r.asDiagonal() * ur2.matrix());
  rep.B_R_term = g.integrate(b_r.asDiagonal() * abs2.pow(1.0 + 4.0 / d).matrix());
  rep.defect = 8.0 * g.integrate(one_minus.asDiagonal() * urr2.matrix());
  rep.trilap_term = g.integrate(profile.trilap_psi.asDiagonal() * abs2.matrix());
  rep.bound_16E = 16.0 * E0;
  rep.vm_rhs = rep.bound_16E - rep.defect + rep.trilap_term - rep.A_R_term + rep.B_R_term;

  const VectorX reduced =
      (one_minus.array() -
       eta * (std::pow(R, 4.0) * a_r.array().square() + b_r.array().square()))
          .matrix();
  const Real dz_norm = std::sqrt(g.integrate(axial_derivative(g, u.values, 1).cwiseAbs2().array()));
  Real rhs = rep.bound_16E - 8.0 * g.integrate(reduced.asDiagonal() * urr2.matrix());
  const Real r2 = std::pow(R, -2.0);
  const Real r4 = std::pow(R, -4.0);
  if (d == 4) {
    rhs += r2 * (std::pow(eta, -0.25) + r2) * dz_norm +
           r4 / std::sqrt(eta) * dz_norm * dz_norm + r4 / eta + r2;
  } else {
    const Real q = 4.0 / (d - 4.0);
    rhs += (std::pow(eta, -0.25) + r2) * dz_norm / R +
           r4 / std::sqrt(eta) * dz_norm * dz_norm +
           std::pow(R, -q) * std::pow(dz_norm, q) + r2 / std::sqrt(eta) +
           r4 / eta + r2;
  }
  rep.composite_rhs = rhs;
  return rep;
}

MarginReport check_radial_sobolev(const Field &u, Index z_index) {
  const Grid &g = *u.grid;
  require(z_index >= 0 && z_index < g.n_z, "check_radial_sobolev: bad z index");
  const Eigen::Matrix<Complex, Eigen::Dynamic, 1> f = u.values.col(z_index);
  const Eigen::Matrix<Complex, Eigen::Dynamic, 1> fr = g.radial->d_r() * f;
  const Real norm = std::sqrt(g.quad_weights.dot(f.cwiseAbs2()));
  const Real grad = std::sqrt(g.quad_weights.dot(fr.cwiseAbs2()));
  MarginReport rep;
  rep.rhs = 2.0 * std::sqrt(norm * grad);
  const VectorX lhs = (g.r_nodes.array().pow(0.5 * (g.d - 2)) * f.array().abs()).matrix();
  rep.lhs = lhs.maxCoeff();
  rep.margin = rep.rhs - rep.lhs;
  rep.holds = rep.margin >= -1e-8 * rep.rhs;
  return rep;
}

MarginReport check_radial_sobolev(const Field &u) {
  MarginReport worst;
  bool first = true;
  for (Index k = 0; k < u.grid->n_z; ++k) {
    const MarginReport r = check_radial_sobolev(u, k);
    const Real rel = r.rhs > 0.0 ? r.margin / r.rhs : 0.0;
    const Real worst_rel = worst.rhs > 0.0 ? worst.margin / worst.rhs : 0.0;
    if (first || rel < worst_rel) {
      worst = r;
      first = false;
    }
  }
  return worst;
}

Real gn_sharp_constant(Real p) {
  require(p > 2.0, "gn_sharp_constant: p must exceed 2");
  // Q = sech^b; int sech^a = B(a/2, 1/2).
  const Real b = 2.0 / (p - 2.0);
  auto sech_int = [](Real a) {
    return std::exp(std::lgamma(0.5 * a) + std::lgamma(0.5) - std::lgamma(0.5 * (a + 1.0)));
  };
  const Real lp = std::pow(sech_int(b * p), 1.0 / p);
  const Real l2 = std::sqrt(sech_int(2.0 * b));
  const Real d2 = std::sqrt(b * b * (sech_int(2.0 * b) - sech_int(2.0 * b + 2.0)));
  const Real alpha = (p - 2.0) / (2.0 * p);
  return lp / (std::pow(d2, alpha) * std::pow(l2, 1.0 - alpha));
}

MarginReport check_gn_1d(const Eigen::Matrix<Complex, Eigen::Dynamic, 1> &g,
                         Real h, Real p, Real c_p) {
  require(p > 2.0, "check_gn_1d: p must exceed 2");
  require(h > 0.0, "check_gn_1d: spacing must be positive");
  const Index n = g.size();
  require(n >= 4 && n % 2 == 0, "check_gn_1d: need an even number of samples");
  const Real c = c_p > 0.0 ? c_p : gn_sharp_constant(p);

  Eigen::FFT<Real> fft;
  std::vector<Complex> in(g.data(), g.data() + n);
  std::vector<Complex> hat(n);
  fft.fwd(hat, in);
  const Real dk = 2.0 * std::numbers::pi / (n * h);
  for (Index m = 0; m < n; ++m) {
    const Index km = m < n / 2 ? m : (m == n / 2 ? 0 : m - n);
    hat[m] *= Complex(0.0, dk * km);
  }
  std::vector<Complex> deriv(n);
  fft.inv(deriv, hat);

  Real sp = 0.0;
  Real s2 = 0.0;
  Real sd = 0.0;
  for (Index m = 0; m < n; ++m) {
    sp += std::pow(std::abs(g(m)), p);
    s2 += std::norm(g(m));
    sd += std::norm(deriv[m]);
  }
  const Real alpha = (p - 2.0) / (2.0 * p);
  MarginReport rep;
  rep.lhs = std::pow(h * sp, 1.0 / p);
  rep.rhs = c * std::pow(h * sd, 0.5 * alpha) * std::pow(h * s2, 0.5 * (1.0 - alpha));
  rep.margin = rep.rhs - rep.lhs;
  rep.holds = rep.margin >= -1e-8 * rep.rhs;
  return rep;
}

AxialDerivativeReport check_axial_derivative_bound(const Field &u) {
  const Grid &g = *u.grid;
  const FieldArray uz = axial_derivative(g, u.values, 1);
  const VectorX a2 = g.integrate_y(u.values.cwiseAbs2().array());
  const VectorX cross = g.integrate_y((u.values.conjugate().cwiseProduct(uz)).real().array());
  const VectorX rhs = g.integrate_y(uz.cwiseAbs2().array()).cwiseSqrt();
  AxialDerivativeReport rep;
  rep.margin_one = std::numeric_limits<Real>::infinity();
  rep.margin_half = std::numeric_limits<Real>::infinity();
  Real scale = 0.0;
  for (Index k = 0; k < g.n_z; ++k) {
    // d/dz |u|_{L2_y} = Re<u, u_z>_y / |u|_{L2_y}
    const Real a = std::sqrt(a2(k));
    const Real lhs = a > 0.0 ? std::abs(cross(k)) / a : 0.0;
    rep.margin_one = std::min(rep.margin_one, rhs(k) - lhs);
    rep.margin_half = std::min(rep.margin_half, 0.5 * rhs(k) - lhs);
    scale = std::max(scale, rhs(k));
  }
  rep.holds = rep.margin_one >= -1e-8 * scale;
  return rep;
}

MarginReport check_axial_trace(const Field &u) {
  const Grid &g = *u.grid;
  const Real mass = g.integrate(u.values.cwiseAbs2().array());
  const Real dz_sq = g.integrate(axial_derivative(g, u.values, 1).cwiseAbs2().array());
  MarginReport rep;
  rep.lhs = axial_trace_sup(u);
  rep.rhs = 2.0 * std::sqrt(mass * dz_sq);
  rep.margin = rep.rhs - rep.lhs;
  rep.holds = rep.margin >= -1e-8 * rep.rhs;
  return rep;
}

TailReport check_tail_estimate(const Field &u, Real R, Real sigma) {
  require(R > 0.0, "check_tail_estimate: R must be positive");
  require(sigma > 0.0, "check_tail_estimate: sigma must be positive");
  const Grid &g = *u.grid;
  VectorX outside(g.n_r);
  for (Index j = 0; j < g.n_r; ++j) outside(j) = g.r_nodes(j) >= R ? 1.0 : 0.0;
  const RealFieldArray abs2 = u.values.array().abs2();
  const FieldArray ur = radial_derivative(g, u.values);
  TailReport rep;
  rep.tail = g.dz * (weighted_by(g.quad_weights, outside).transpose() *
                     abs2.pow(sigma + 1.0).matrix().rowwise().sum())(0);
  const Real grad_sq = g.integrate(abs2) > 0.0
                           ? g.integrate(ur.cwiseAbs2().array()) +
                                 g.integrate(axial_derivative(g, u.values, 1).cwiseAbs2().array())
                           : 0.0;
  const Real denom = std::pow(R, -sigma * (g.d - 2)) * std::pow(grad_sq, sigma);
  rep.ratio = denom > 0.0 ? rep.tail / denom : 0.0;
  const VectorX a = g.integrate_y(abs2).cwiseSqrt();
  const VectorX b = g.integrate_y(ur.cwiseAbs2().array()).cwiseSqrt();
  const Real slice_sum =
      (a.array().pow(sigma + 2.0) * b.array().pow(sigma)).sum() * g.dz;
  rep.slice_bound = std::pow(2.0, 2.0 * sigma) * std::pow(R, -sigma * (g.d - 2)) * slice_sum;
  rep.holds = rep.tail <= rep.slice_bound * (1.0 + 1e-8);
  return rep;
}

InequalitySuiteResult run_inequality_suite(const InequalitySuiteOptions &options) {
  require(options.samples >= 1, "run_inequality_suite: need samples");
  auto grid = std::make_shared<const Grid>(
      build_grid(options.d, options.extent, options.n, options.extent, options.n));
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<Real> unit(0.0, 1.0);

  InequalitySuiteResult res;
  res.tallies = {{"radial_sobolev"}, {"axial_derivative_const1"}, {"axial_trace"},
                 {"tail_slice_bound"}};
  res.max_tail_ratio_by_radius.assign(options.radii.size(), 0.0);

  auto tally = [](InequalityTally &t, bool ok, Real rel) {
    ++t.samples;
    if (!ok) ++t.violations;
    t.worst_relative_margin = t.samples == 1 ? rel : std::min(t.worst_relative_margin, rel);
  };

  for (Index s = 0; s < options.samples; ++s) {
    RandomFieldOptions ro;
    ro.bumps = 1 + static_cast<int>(4 * unit(rng));
    ro.amplitude = 0.2 + 2.8 * unit(rng);
    ro.min_width = 0.6;
    ro.max_width = 0.6 + 1.4 * unit(rng);
    ro.max_center_r = 6.0 * unit(rng);
    ro.max_center_z = 3.0;
    ro.max_momentum = 3.0 * unit(rng);
    const Field u = random_field(grid, rng, ro);

    const MarginReport sob = check_radial_sobolev(u);
    tally(res.tallies[0], sob.holds, sob.rhs > 0.0 ? sob.margin / sob.rhs : 0.0);

    const AxialDerivativeReport de = check_axial_derivative_bound(u);
    tally(res.tallies[1], de.holds, de.margin_one);
    if (de.margin_half < 0.0) ++res.half_constant_failures;

    const MarginReport ud = check_axial_trace(u);
    tally(res.tallies[2], ud.holds, ud.rhs > 0.0 ? ud.margin / ud.rhs : 0.0);

    for (std::size_t i = 0; i < options.radii.size(); ++i) {
      const TailReport t = check_tail_estimate(u, options.radii[i], options.sigma);
      const Real rel = t.slice_bound > 0.0 ? (t.slice_bound - t.tail) / t.slice_bound : 0.0;
      tally(res.tallies[3], t.holds, rel);
      res.max_tail_ratio_by_radius[i] = std::max(res.max_tail_ratio_by_radius[i], t.ratio);
      res.max_tail_ratio = std::max(res.max_tail_ratio, t.ratio);
    }
  }
  res.passed = std::isfinite(res.max_tail_ratio);
  for (const auto &t : res.tallies) res.passed = res.passed && t.violations == 0;
  return res;
}

}  // namespace bnls
