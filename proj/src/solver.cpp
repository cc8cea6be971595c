#include "bnls/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bnls {

LinearPropagator::LinearPropagator(std::shared_ptr<const Grid> grid, Real mu,
                                   Real dt)
    : grid_(std::move(grid)), mu_(mu), dt_(dt) {
  require(dt != 0.0 && std::isfinite(dt), "LinearPropagator: dt must be nonzero");
  const Grid &g = *grid_;
  const VectorX &lambda = g.radial->eigenvalues();
  phase_.resize(g.n_r, g.n_z);
  for (Index i = 0; i < g.n_r; ++i) {
    for (Index m = 0; m < g.n_z; ++m) {
      const Real kappa = -lambda(i) + g.kz(m) * g.kz(m);
      const Real omega = kappa * kappa + mu * kappa;
      phase_(i, m) = std::polar(1.0, -dt * omega);
    }
  }
}

void LinearPropagator::apply(FieldArray &u) const {
  axial_forward(u);
  FieldArray modal = apply_radial(grid_->radial->to_modal(), u);
  modal.array() *= phase_.array();
  u = apply_radial(grid_->radial->from_modal(), modal);
  axial_inverse(u);
}

void nonlinear_phase(FieldArray &u, Real sigma, Real tau) {
  if (tau == 0.0) return;
  auto a = u.array();
  if (sigma == 1.0) {
    a *= (Complex(0.0, tau) * a.abs2()).exp();
  } else {
    a *= (Complex(0.0, tau) * a.abs2().pow(sigma).cast<Complex>()).exp();
  }
}

void strang_step(FieldArray &u, const LinearPropagator &linear, Real sigma,
                 Real nonlinearity) {
  strang_steps(u, linear, sigma, nonlinearity, 1);
}

void strang_steps(FieldArray &u, const LinearPropagator &linear, Real sigma,
                  Real nonlinearity, Index steps) {
  const Real full = linear.dt() * nonlinearity;
  nonlinear_phase(u, sigma, 0.5 * full);
  for (Index s = 0; s < steps; ++s) {
    linear.apply(u);
    nonlinear_phase(u, sigma, s + 1 < steps ? full : 0.5 * full);
  }
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::running: return "running";
    case RunStatus::blowup_detected: return "blowup_detected";
    case RunStatus::completed: return "completed";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

std::string to_string(BlowupTrigger t) {
  switch (t) {
    case BlowupTrigger::none: return "none";
    case BlowupTrigger::lap_growth: return "lap_sq_growth";
    case BlowupTrigger::dt_underflow: return "dt_underflow";
    case BlowupTrigger::refinement_cap: return "refinement_cap";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  require(sigma > 0.0, "sigma must be positive");
  require(dt_min > 0.0 && dt_min < dt0, "need 0 < dt_min < dt0");
  require(dt0 <= dt_max, "need dt0 <= dt_max");
  require(t_end > 0.0, "t_end must be positive");
  require(mass_tol > 0.0 && energy_tol > 0.0 && step_energy_tol > 0.0,
          "tolerances must be positive");
  require(growth_factor > 1.0, "growth_factor must exceed 1");
  require(snapshot_every >= 1, "snapshot_every must be >= 1");
  require(field_every >= 0, "field_every must be >= 0");
  require(check_every >= 1 && snapshot_every % check_every == 0,
          "check_every must divide snapshot_every");
}

namespace {

Real boundary_fraction(const Grid &g, const FieldArray &u, Real mass) {
  if (mass <= 0.0) return 0.0;
  RealFieldArray dens = u.array().abs2();
  for (Index j = 0; j < g.n_r; ++j) {
    const bool outer_r = g.r_nodes(j) > 0.9 * g.r_max;
    for (Index k = 0; k < g.n_z; ++k) {
      if (!outer_r && std::abs(g.z_nodes(k)) <= 0.9 * g.z_max) dens(j, k) = 0.0;
    }
  }
  return g.integrate(dens) / mass;
}

Real spectral_tail_fraction(const Grid &g, const FieldArray &u) {
  FieldArray hat = u;
  axial_forward(hat);
  const RealFieldArray power =
      apply_radial(g.radial->to_modal(), hat).array().abs2();
  const Real total = power.sum();
  if (total <= 0.0) return 0.0;
  const Index r_cut = g.n_r - g.n_r / 8;
  const Index band = g.n_z / 16;  // |m| within n_z/16 of Nyquist
  Real tail = power.bottomRows(g.n_r - r_cut).sum();
  tail += power.topRows(r_cut).middleCols(g.n_z / 2 - band, 2 * band).sum();
  return tail / total;
}

void record_snapshot(const SolverConfig &config, SimState &state,
                     Trajectory &traj, const FunctionalSnapshot &snap,
                     const SnapshotObserver &observer) {
  const Grid &g = *state.field.grid;
  traj.snapshots.push_back(snap);
  const Index index = static_cast<Index>(traj.snapshots.size()) - 1;
  state.boundary_mass_fraction =
      std::max(state.boundary_mass_fraction,
               boundary_fraction(g, state.field.values, snap.mass));
  if (config.resolution_tol > 0.0) {
    state.spectral_tail = spectral_tail_fraction(g, state.field.values);
  }
  if (config.field_every > 0 && index % config.field_every == 0) {
    const std::size_t bytes = sizeof(Complex) * static_cast<std::size_t>(g.size());
    if ((traj.fields.size() + 1) * bytes <= config.field_memory_cap) {
      traj.fields.push_back({index, state.t, state.field.values});
    } else {
      traj.fields_truncated = true;
    }
  }
  if (observer) observer(state, snap);
}

FunctionalSnapshot measure(const SolverConfig &config, const SimState &state) {
  auto s = spectral_functionals(*state.field.grid, state.field.values,
                                config.mu, config.sigma, state.nonlinearity);
  s.time = state.t;
  return s;
}

}  // namespace

SimState initial_state(const SolverConfig &config, Field u0) {
  config.validate();
  require(u0.values.allFinite(), "initial field has non-finite entries");
  SimState state;
  state.field = std::move(u0);
  state.dt = config.dt0;
  state.nonlinearity = config.nonlinearity;
  const auto s = measure(config, state);
  require(s.mass > 0.0, "initial field has zero mass");
  state.mass0 = s.mass;
  state.energy0 = s.energy;
  state.energy_prev = s.energy;
  state.lap0 = s.lap_sq;
  return state;
}

void step(SimState &state, const SolverConfig &config) {
  require(state.status == RunStatus::running, "step: state is not running");
  const LinearPropagator lin(state.field.grid, config.mu, state.dt);
  strang_step(state.field.values, lin, config.sigma, state.nonlinearity);
  if (!state.field.values.allFinite()) {
    state.status = RunStatus::failed;
    state.message = "non-finite values";
    return;
  }
  state.t += state.dt;
  ++state.step_count;
  ++state.field.generation;
}

void evolve(const SolverConfig &config, SimState &state, Trajectory &traj,
            const SnapshotObserver &observer) {
  config.validate();
  if (state.status != RunStatus::running) return;
  if (traj.snapshots.empty()) {
    record_snapshot(config, state, traj, measure(config, state), observer);
  }
  const Real energy_scale = std::max(1.0, std::abs(state.energy0));
  std::optional<LinearPropagator> lin;
  FieldArray backup;
  bool last_recorded = true;
  bool rejected_on_total = false;

  auto finish = [&](RunStatus status, BlowupTrigger trigger, std::string msg) {
    state.status = status;
    state.trigger = trigger;
    state.message = std::move(msg);
  };

  while (state.status == RunStatus::running) {
    const Real remaining = config.t_end - state.t;
    if (remaining <= 1e-12 * std::max(1.0, config.t_end)) {
      finish(RunStatus::completed, BlowupTrigger::none, "reached t_end");
      break;
    }
    if (config.max_steps > 0 && state.step_count >= config.max_steps) break;

    Index block = config.check_every;
    if (config.max_steps > 0) block = std::min(block, config.max_steps - state.step_count);
    Real dt_step = state.dt;
    if (block * dt_step > remaining) {
      block = std::max<Index>(1, static_cast<Index>(std::ceil(remaining / dt_step - 1e-9)));
      dt_step = remaining / block;
    }
    if (!lin || lin->dt() != dt_step) lin.emplace(state.field.grid, config.mu, dt_step);
    backup = state.field.values;
    strang_steps(state.field.values, *lin, config.sigma, state.nonlinearity, block);

    if (!state.field.values.allFinite()) {
      state.field.values = backup;
      finish(RunStatus::failed, BlowupTrigger::none, "non-finite values");
      break;
    }

    auto snap = measure(config, state);
    snap.time = state.t + block * dt_step;
    const Real scale = std::max(
        {1.0, std::abs(state.energy0),
         0.5 * snap.lap_sq + 0.5 * std::abs(config.mu) * snap.grad_sq +
             state.nonlinearity * snap.pot / (2.0 * config.sigma + 2.0)});
    const Real mass_drift = std::abs(snap.mass - state.mass0) / state.mass0;
    const Real energy_drift = std::abs(snap.energy - state.energy0) / energy_scale;
    const Real step_change =
        std::abs(snap.energy - state.energy_prev) / (scale * block);
    const bool total_bad =
        mass_drift > config.mass_tol || energy_drift > config.energy_tol;
    const bool step_bad = step_change > config.step_energy_tol;

    if (total_bad || step_bad) {
      state.field.values = backup;
      if (!config.adaptive) {
        finish(RunStatus::failed, BlowupTrigger::none,
               "conservation tolerance exceeded at fixed dt");
        break;
      }
      rejected_on_total = total_bad;
      state.dt *= 0.5;
      state.good_streak = 0;
      if (state.dt < config.dt_min) {
        if (rejected_on_total) {
          finish(RunStatus::failed, BlowupTrigger::none,
                 "conservation violated at dt_min");
        } else {
          finish(RunStatus::blowup_detected, BlowupTrigger::dt_underflow,
                 "dt fell below dt_min");
        }
        break;
      }
      continue;
    }

    state.t = snap.time;
    state.step_count += block;
    ++state.field.generation;
    state.energy_prev = snap.energy;
    last_recorded = false;

    if (step_change < 0.01 * config.step_energy_tol) {
      state.good_streak += block;
    } else {
      state.good_streak = 0;
    }
    if (config.adaptive && state.good_streak >= 50) {
      state.dt = std::min(2.0 * state.dt, config.dt_max);
      state.good_streak = 0;
    }

    const bool grown = snap.lap_sq >= config.growth_factor * state.lap0;
    if (grown) {
      finish(RunStatus::blowup_detected, BlowupTrigger::lap_growth,
             "lap_sq exceeded growth_factor times its initial value");
    }
    if (grown || state.step_count % config.snapshot_every == 0) {
      record_snapshot(config, state, traj, snap, observer);
      last_recorded = true;
      if (state.status == RunStatus::running && config.resolution_tol > 0.0 &&
          state.spectral_tail > config.resolution_tol) {
        finish(RunStatus::blowup_detected, BlowupTrigger::refinement_cap,
               "solution no longer resolved by the grid");
      }
    }
  }

  if (!last_recorded && state.status != RunStatus::failed) {
    record_snapshot(config, state, traj, measure(config, state), observer);
  }
}

namespace {

struct PowerFit {
  Real a = 0.0;
  Real p = 0.0;
  Real sse = std::numeric_limits<Real>::infinity();
};

PowerFit fit_at(const std::vector<Real> &t, const std::vector<Real> &y,
                Real t_star) {
  const std::size_t n = t.size();
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<Real> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = -std::log(t_star - t[i]);
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  PowerFit f;
  const Real det = n * sxx - sx * sx;
  if (det <= 0.0) return f;
  f.p = (n * sxy - sx * sy) / det;
  f.a = (sy - f.p * sx) / n;
  f.sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real r = y[i] - f.a - f.p * x[i];
    f.sse += r * r;
  }
  return f;
}

}  // namespace

BlowupVerdict detect_blowup(const std::vector<Real> &t,
                            const std::vector<Real> &lap_sq,
                            const DetectorOptions &options) {
  require(t.size() == lap_sq.size(), "detect_blowup: size mismatch");
  BlowupVerdict v;
  const Index n = static_cast<Index>(t.size());
  if (n < options.min_samples) return v;
  for (Index i = 0; i < n; ++i) {
    if (!(lap_sq[i] > 0.0) || !std::isfinite(lap_sq[i])) return v;
  }
  v.growth_ratio = lap_sq.back() / lap_sq.front();
  v.detected = v.growth_ratio >= options.growth_factor;
  if (v.detected) v.trigger = BlowupTrigger::lap_growth;

  const Index w = std::min(
      n, std::max<Index>(options.min_samples,
                         static_cast<Index>(std::ceil(options.window_fraction * n))));
  v.window = w;
  std::vector<Real> tw(t.end() - w, t.end());
  std::vector<Real> yw(w);
  for (Index i = 0; i < w; ++i) yw[i] = std::log(lap_sq[n - w + i]);
  const bool increasing = yw.back() > yw.front() + 1e-12;
  if (!increasing) return v;

  const Real t_last = tw.back();
  const Real span = std::max(t_last - tw.front(), 1e-300);
  constexpr Real lo_exp = -6.0;
  constexpr Real hi_exp = 4.0;
  constexpr int scan = 201;
  auto sse_at = [&](Real e) {
    return fit_at(tw, yw, t_last + span * std::pow(10.0, e)).sse;
  };
  int best = 0;
  Real best_sse = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < scan; ++i) {
    const Real e = lo_exp + (hi_exp - lo_exp) * i / (scan - 1);
    const Real s = sse_at(e);
    if (s < best_sse) {
      best_sse = s;
      best = i;
    }
  }
  const Real step = (hi_exp - lo_exp) / (scan - 1);
  Real a = lo_exp + step * std::max(best - 1, 0);
  Real b = lo_exp + step * std::min(best + 1, scan - 1);
  const Real golden = 0.5 * (std::sqrt(5.0) - 1.0);
  Real c = b - golden * (b - a);
  Real d = a + golden * (b - a);
  for (int it = 0; it < 80; ++it) {
    if (sse_at(c) < sse_at(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - golden * (b - a);
    d = a + golden * (b - a);
  }
  const Real e_best = 0.5 * (a + b);
  const Real t_star = t_last + span * std::pow(10.0, e_best);
  const PowerFit fit = fit_at(tw, yw, t_star);
  v.fit_rms = std::sqrt(fit.sse / w);

  // The T -> infinity limit of the power law is exponential growth; a finite
  // T must beat the exponential fit clearly.
  Real st = 0, sy = 0, stt = 0, sty = 0;
  for (Index i = 0; i < w; ++i) {
    const Real x = tw[i] - t_last;
    st += x;
    sy += yw[i];
    stt += x * x;
    sty += x * yw[i];
  }
  const Real slope = (w * sty - st * sy) / (w * stt - st * st);
  const Real icpt = (sy - slope * st) / w;
  Real sse_exp = 0.0;
  for (Index i = 0; i < w; ++i) {
    const Real r = yw[i] - icpt - slope * (tw[i] - t_last);
    sse_exp += r * r;
  }

  const bool at_boundary = best >= scan - 2;
  if (at_boundary || fit.p <= 0.0 || fit.sse >= 0.25 * sse_exp) {
    v.branch = "infinite_time";
    return v;
  }
  v.branch = "finite_time";
  v.t_star_estimate = t_star;
  v.growth_exponent = 0.5 * fit.p;
  return v;
}

BlowupVerdict detect_blowup(const Trajectory &traj,
                            const DetectorOptions &options) {
  std::vector<Real> t;
  std::vector<Real> lap;
  t.reserve(traj.snapshots.size());
  lap.reserve(traj.snapshots.size());
  for (const auto &s : traj.snapshots) {
    t.push_back(s.time);
    lap.push_back(s.lap_sq);
  }
  return detect_blowup(t, lap, options);
}

}  // namespace bnls
