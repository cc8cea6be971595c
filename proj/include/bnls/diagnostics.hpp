#ifndef BNLS_DIAGNOSTICS_HPP_
#define BNLS_DIAGNOSTICS_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bnls/geometry.hpp"
#include "bnls/initial_conditions.hpp"
#include "bnls/operators.hpp"
#include "bnls/solver.hpp"

namespace bnls {

/// 2 Im int conj(u) (psi_R'(r) d_r u + z d_z u) dx
Real virial(const Field &u, const CutoffProfile &profile);

/// -i (Delta^2 u - mu Delta u - nonlinearity |u|^{2 sigma} u)
FieldArray time_derivative(const Field &u, Real mu, Real sigma,
                           Real nonlinearity = 1.0);

/// d/dt of virial() along the semi-discrete flow through u.
Real virial_rate(const Field &u, const CutoffProfile &profile, Real mu,
                 Real sigma, Real nonlinearity = 1.0);

/// -4 mu int (1 - psi_R'') |d_r u|^2 dx
Real x_mu(const Field &u, const CutoffProfile &profile, Real mu);

/*
 * Size of the remainder terms of the localized virial estimate, each scaled
 * by the mass so the sum is homogeneous in u:
 *   R^-4 M,  R^-2 |grad u|^2,  R^{-sigma(d-2)} M |grad u|^{2 sigma},  |mu| R^-2 M.
 */
struct ErrorTerms {
  std::array<Real, 4> terms{};
  Real sum() const { return terms[0] + terms[1] + terms[2] + terms[3]; }
};
ErrorTerms error_terms(const FunctionalSnapshot &s, Real R, int d, Real sigma,
                       Real mu);

/// 8 |Delta u|^2 + 4 mu |grad u|^2 - nonlinearity (2 d sigma / (sigma + 1)) P
Real virial_main_term(const FunctionalSnapshot &s, int d, Real sigma, Real mu,
                      Real nonlinearity = 1.0);
/// 4 d sigma E0 - (2 d sigma - 8) |Delta u|^2 - mu (2 d sigma - 4) |grad u|^2
Real virial_main_term_e0(const FunctionalSnapshot &s, Real energy0, int d,
                         Real sigma, Real mu);

struct VirialReport {
  Real t = 0.0;
  Index snapshot = 0;
  Real M_phi = 0.0;
  Real dMdt_numeric = 0.0;
  /// Rate from the equation at this instant.
  Real dMdt_instant = 0.0;
  /// Instantaneous form; equals the E0 form while energy is conserved.
  Real rhs_main = 0.0;
  Real rhs_main_e0 = 0.0;
  Real X_mu = 0.0;
  ErrorTerms err_terms;
  Real C = 0.0;
  Real tol_fd = 0.0;
  /// Size of the time-discretization bias of the sampled rate (see
  /// splitting_rate_bias); zero when unknown.
  Real split_bias = 0.0;
  /// Largest |split_bias| over the difference stencil.
  Real tol_split = 0.0;
  Real rhs_total = 0.0;
  /// rhs_total + tol_fd + tol_split - dMdt_numeric
  Real margin = 0.0;
  bool interior = false;
  bool holds = false;
};

struct VirialSeries {
  Real R = 0.0;
  std::vector<VirialReport> reports;
  Index interior_violations = 0;
};

/// M_phi for several radii, sharing the derivatives of u.
std::vector<Real> virial_values(const Field &u, const std::vector<CutoffProfile> &profiles);

/*
 * Bias of dM_phi/dt along the Strang trajectory with step dt relative to the
 * semi-discrete flow, from one step against two half steps:
 *   4/3 (M(S_dt u) - M(S_{dt/2}^2 u)) / dt.
 * Zero for the linear flow, whose propagator is exact.
 */
std::vector<Real> splitting_rate_bias(const Field &u,
                                      const std::vector<CutoffProfile> &profiles,
                                      Real mu, Real sigma, Real nonlinearity, Real dt);

/// Everything except the finite-difference columns, at one instant.
VirialReport virial_sample(const Field &u, const FunctionalSnapshot &s,
                           const CutoffProfile &profile, Real mu, Real sigma,
                           Real energy0, Real C, Real nonlinearity = 1.0);

/// The same for several radii, sharing the field derivatives.
std::vector<VirialReport> virial_samples(const Field &u, const FunctionalSnapshot &s,
                                         const std::vector<CutoffProfile> &profiles,
                                         Real mu, Real sigma, Real energy0, Real C,
                                         Real nonlinearity = 1.0);

/// Fills dMdt_numeric, tol_fd, tol_split, margin and holds from the sampled
/// M_phi, rates and split_bias; needs at least three samples.
void finalize_virial_series(VirialSeries &series);

/// Uses the stored fields of the trajectory; throws if fewer than three.
VirialSeries virial_rate_report(const Trajectory &traj,
                                std::shared_ptr<const Grid> grid,
                                const CutoffProfile &profile, Real mu,
                                Real sigma, Real energy0, Real C,
                                Real nonlinearity = 1.0);

/// Largest (rate - main - X_mu) / sum(err_terms) over the fields and radii,
/// clamped at zero.
Real calibrate_virial_constant(const std::vector<Field> &family,
                               const std::vector<Real> &radii, Real mu,
                               Real sigma, Real nonlinearity = 1.0);

struct MassCriticalReport {
  Real A_R_term = 0.0;
  Real B_R_term = 0.0;
  Real defect = 0.0;
  Real trilap_term = 0.0;
  Real bound_16E = 0.0;
  /// 16 E0 - defect + trilap - A_R_term + B_R_term
  Real vm_rhs = 0.0;
  Real eta = 1.0;
  /// Composite right side for the supplied eta (d = 4 or d >= 5 form).
  Real composite_rhs = 0.0;
};

/// Requires d >= 4 and sigma = 4/d.
MassCriticalReport mass_critical_report(const Field &u,
                                        const CutoffProfile &profile, Real E0,
                                        Real sigma, Real eta = 1.0);

struct MarginReport {
  Real lhs = 0.0;
  Real rhs = 0.0;
  /// Smallest rhs - lhs over the samples.
  Real margin = 0.0;
  bool holds = false;
};

/// Strauss bound r^{(d-2)/2} |f(r)| <= 2 |f|^{1/2} |grad f|^{1/2} on the slice
/// u(., z_k), norms in R^{d-1}. Tolerance 1e-8 rhs.
MarginReport check_radial_sobolev(const Field &u, Index z_index);
/// Worst slice.
MarginReport check_radial_sobolev(const Field &u);

/// Sharp constant of |f|_p <= C |f'|^a |f|^{1-a} on the line, from the
/// sech^{2/(p-2)} optimizer.
Real gn_sharp_constant(Real p);

/// g on a uniform periodic grid of spacing h; c_p <= 0 selects the sharp value.
MarginReport check_gn_1d(const Eigen::Matrix<Complex, Eigen::Dynamic, 1> &g,
                         Real h, Real p, Real c_p = 0.0);

struct AxialDerivativeReport {
  /// min_z |d_z u|_{L2_y} - |d_z |u|_{L2_y}|
  Real margin_one = 0.0;
  /// Same with the factor 1/2 on the right.
  Real margin_half = 0.0;
  bool holds = false;
};
AxialDerivativeReport check_axial_derivative_bound(const Field &u);

/// sup_z |u|^2_{L2_y} <= 2 |u|_2 |d_z u|_2
MarginReport check_axial_trace(const Field &u);

struct TailReport {
  Real tail = 0.0;
  /// tail / (R^{-sigma(d-2)} |grad u|^{2 sigma})
  Real ratio = 0.0;
  /// 2^{2 sigma} R^{-sigma(d-2)} int |u|_{L2_y}^{sigma+2} |grad_y u|_{L2_y}^sigma dz
  Real slice_bound = 0.0;
  bool holds = false;
};
TailReport check_tail_estimate(const Field &u, Real R, Real sigma);

struct InequalitySuiteOptions {
  Index samples = 1000;
  std::uint64_t seed = 1;
  int d = 4;
  Real sigma = 1.0;
  Index n = 64;
  Real extent = 12.0;
  std::vector<Real> radii{2.0, 4.0, 8.0};
};

struct InequalityTally {
  std::string name;
  Index samples = 0;
  Index violations = 0;
  Real worst_relative_margin = 0.0;
};

struct InequalitySuiteResult {
  std::vector<InequalityTally> tallies;
  /// Fields on which the constant-1/2 form of the axial bound failed.
  Index half_constant_failures = 0;
  Real max_tail_ratio = 0.0;
  std::vector<Real> max_tail_ratio_by_radius;
  bool passed = false;
};

InequalitySuiteResult run_inequality_suite(const InequalitySuiteOptions &options);

}  // namespace bnls

#endif  // BNLS_DIAGNOSTICS_HPP_
