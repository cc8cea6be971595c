#include "bnls/groundstate.hpp"

#include <cmath>
#include <ostream>

namespace bnls {

namespace {

VectorX nonlinearity(const VectorX &q, Real sigma) {
  return (q.array().abs().pow(2.0 * sigma) * q.array()).matrix();
}

Real weighted_dot(const RadialBasis &b, const VectorX &u, const VectorX &v) {
  return b.weights().dot(u.cwiseProduct(v));
}

// (Delta^2 + 1) in the eigenbasis.
VectorX symbol(const RadialBasis &b) {
  return (b.eigenvalues().array().square() + 1.0).matrix();
}

}  // namespace

Real critical_index(int d, Real sigma) {
  require(sigma > 0.0, "sigma must be positive");
  return 0.5 * d - 2.0 / sigma;
}

VectorX petviashvili_step(const RadialBasis &basis, Real sigma,
                          const VectorX &q, Real exponent) {
  const VectorX k = symbol(basis);
  const VectorX c = basis.to_modal() * q;
  const VectorX nq = nonlinearity(q, sigma);
  const Real num = c.dot(k.cwiseProduct(c));
  const Real den = weighted_dot(basis, nq, q);
  if (!(den > 0.0)) throw NumericalError("petviashvili_step: <N(q), q> <= 0");
  const VectorX solved =
      basis.from_modal() * (basis.to_modal() * nq).cwiseQuotient(k);
  return std::pow(num / den, exponent) * solved;
}

GroundStateResult solve_ground_state(int d, Real sigma,
                                     const GroundStateOptions &options,
                                     const VectorX &init) {
  require(d >= 1, "solve_ground_state: d must be >= 1");
  require(sigma > 0.0, "solve_ground_state: sigma must be positive");
  require(d <= 4 || sigma < 4.0 / (d - 4),
          "solve_ground_state: sigma must be energy-subcritical");
  require(d >= 2, "solve_ground_state: the radial basis needs d >= 2");

  GroundStateResult res;
  res.d = d;
  res.sigma = sigma;
  res.basis = std::make_shared<const RadialBasis>(d, options.n_r, options.r_max);
  const RadialBasis &b = *res.basis;
  const Real gamma =
      options.exponent > 0.0 ? options.exponent : (2.0 * sigma + 1.0) / (2.0 * sigma);

  VectorX q;
  if (init.size() == 0) {
    q = (2.0 * (-0.25 * b.nodes().array().square()).exp()).matrix();
  } else {
    require(init.size() == b.size(), "solve_ground_state: init has wrong size");
    q = init;
  }
  const Real norm0 = std::sqrt(weighted_dot(b, q, q));
  require(norm0 > 0.0, "solve_ground_state: zero initial profile");

  const VectorX k = symbol(b);
  auto residual_of = [&](const VectorX &v) {
    const VectorX kv = b.from_modal() * k.cwiseProduct(b.to_modal() * v);
    const VectorX r = kv - nonlinearity(v, sigma);
    return std::sqrt(weighted_dot(b, r, r));
  };

  bool converged = false;
  for (Index it = 0; it < options.max_iters; ++it) {
    VectorX next;
    try {
      next = petviashvili_step(b, sigma, q, gamma);
    } catch (const NumericalError &) {
      throw GroundStateError("trivial attractor: profile collapsed to zero; "
                             "try a larger initial amplitude",
                             res.change_history);
    }
    const Real norm = std::sqrt(weighted_dot(b, next, next));
    if (!std::isfinite(norm)) {
      throw GroundStateError("ground-state iteration diverged", res.change_history);
    }
    if (norm < 1e-8 * norm0) {
      throw GroundStateError("trivial attractor: profile collapsed to zero; "
                             "try a larger initial amplitude",
                             res.change_history);
    }
    const VectorX diff = next - q;
    const Real change = std::sqrt(weighted_dot(b, diff, diff)) / norm;
    res.change_history.push_back(change);
    q = std::move(next);
    res.iterations = it + 1;
    if (change <= options.tol && residual_of(q) <= 1e-8 * norm) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw GroundStateError("ground-state iteration did not converge within max_iters",
                           res.change_history);
  }
  // The iteration fixes Q only up to sign.
  if (q(0) < 0.0) q = -q;

  res.profile = q;
  res.residual = residual_of(q);
  res.mass_Q = weighted_dot(b, q, q);
  const VectorX lq = b.laplacian() * q;
  res.lap_Q_sq = weighted_dot(b, lq, lq);
  res.pot_Q = b.weights().dot(q.array().abs().pow(2.0 * sigma + 2.0).matrix());
  res.energy_Q = 0.5 * res.lap_Q_sq - res.pot_Q / (2.0 * sigma + 2.0);
  res.pohozaev_defect = (res.lap_Q_sq + res.mass_Q - res.pot_Q) / res.pot_Q;
  res.negativity = std::max(0.0, -q.minCoeff() / q(0));
  Real rise = 0.0;
  for (Index j = 1; j < q.size(); ++j) rise = std::max(rise, q(j) - q(j - 1));
  res.monotonicity_defect = rise / q(0);

  res.s_c = critical_index(d, sigma);
  res.threshold_lap =
      res.lap_Q_sq * std::pow(std::sqrt(res.mass_Q), 2.0 - res.s_c);
  if (res.s_c > 0.0) {
    res.threshold_EM =
        std::pow(res.energy_Q, res.s_c) * std::pow(res.mass_Q, 2.0 - res.s_c);
  }
  return res;
}

ThresholdSet thresholds(const GroundStateResult &q) {
  require(q.s_c > 0.0, "thresholds: s_c <= 0, the energy-mass threshold is undefined");
  require(q.s_c < 2.0, "thresholds: s_c >= 2 is energy-critical or beyond");
  ThresholdSet t;
  t.s_c = q.s_c;
  t.energy_Q = q.energy_Q;
  t.mass_Q = q.mass_Q;
  t.lap_Q_sq = q.lap_Q_sq;
  t.threshold_EM = std::pow(q.energy_Q, q.s_c) * std::pow(q.mass_Q, 2.0 - q.s_c);
  t.threshold_lap = q.lap_Q_sq * std::pow(std::sqrt(q.mass_Q), 2.0 - q.s_c);
  return t;
}

namespace {

InequalityCheck less_than(std::string name, Real lhs, Real rhs) {
  return {std::move(name), lhs, rhs, rhs - lhs, lhs < rhs};
}

}  // namespace

CriterionReport check_blowup_criteria(const FunctionalSnapshot &u0, Real mu,
                                      Real sigma, int d,
                                      const std::optional<ThresholdSet> &th,
                                      Real chi) {
  CriterionReport rep;
  rep.s_c = critical_index(d, sigma);
  const Real E = u0.energy;
  const Real M = u0.mass;
  const bool critical = std::abs(rep.s_c) < 1e-12;

  if (critical && d >= 4 && mu >= 0.0) {
    rep.within_hypotheses = true;
    rep.clause = mu > 0.0 ? "thm2_i" : "thm2_ii";
    rep.description = mu > 0.0
                          ? "mass-critical, mu > 0, E < 0: finite-time blowup"
                          : "mass-critical, mu = 0, E < 0: blowup in finite or infinite time";
    rep.inequalities.push_back(less_than("E[u0] < 0", E, 0.0));
    rep.satisfied = rep.inequalities.back().holds;
    return rep;
  }

  const bool supercritical = rep.s_c > 0.0 && rep.s_c < 2.0;
  if (supercritical && d >= 5 && sigma <= 1.0) {
    rep.within_hypotheses = true;
    if (mu > 0.0) {
      rep.clause = "thm1_i";
      rep.description = "mass-supercritical, mu > 0, E < 0";
      rep.inequalities.push_back(less_than("E[u0] < 0", E, 0.0));
    } else if (mu < 0.0) {
      rep.clause = "thm1_i";
      rep.description = "mass-supercritical, mu < 0, E < -chi mu^2 M";
      rep.inequalities.push_back(less_than("E[u0] < -chi mu^2 M[u0]", E, -chi * mu * mu * M));
      rep.warnings.push_back(
          "chi is a user-supplied placeholder; its true value is not known here");
    } else {
      rep.clause = "thm1_ii";
      if (E < 0.0) {
        rep.description = "mass-supercritical, mu = 0, E < 0";
        rep.inequalities.push_back(less_than("E[u0] < 0", E, 0.0));
      } else {
        require(th.has_value(),
                "check_blowup_criteria: thresholds are required for mu = 0, E >= 0");
        rep.description = "mass-supercritical, mu = 0, E >= 0 below the ground-state thresholds";
        const Real s = rep.s_c;
        rep.inequalities.push_back(less_than("E^s_c M^(2-s_c) < E[Q]^s_c M[Q]^(2-s_c)",
                                             std::pow(E, s) * std::pow(M, 2.0 - s),
                                             th->threshold_EM));
        const Real lap_product = u0.lap_sq * std::pow(std::sqrt(M), 2.0 - s);
        rep.inequalities.push_back(
            {"|Delta u0|^2 |u0|^(2-s_c) > |Delta Q|^2 |Q|^(2-s_c)", lap_product,
             th->threshold_lap, lap_product - th->threshold_lap,
             lap_product > th->threshold_lap});
      }
    }
    rep.satisfied = true;
    for (const auto &c : rep.inequalities) rep.satisfied = rep.satisfied && c.holds;
    return rep;
  }

  rep.description = "outside theorem hypotheses";
  rep.warnings.push_back("outside theorem hypotheses; run is exploratory");
  rep.inequalities.push_back(less_than("E[u0] < 0", E, 0.0));
  return rep;
}

void write_ground_state_csv(std::ostream &os, const GroundStateResult &q) {
  os << "r,Q\n";
  os.precision(17);
  for (Index j = 0; j < q.profile.size(); ++j) {
    os << q.basis->nodes()(j) << ',' << q.profile(j) << '\n';
  }
}

}  // namespace bnls
