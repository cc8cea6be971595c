#ifndef BNLS_SOLVER_HPP_
#define BNLS_SOLVER_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bnls/operators.hpp"

namespace bnls {

/// exp(-i dt (Delta^2 - mu Delta)), diagonal in (radial eigenmode, axial
/// wavenumber). A negative dt gives the backward flow.
class LinearPropagator {
 public:
  LinearPropagator(std::shared_ptr<const Grid> grid, Real mu, Real dt);

  Real dt() const noexcept { return dt_; }
  Real mu() const noexcept { return mu_; }
  void apply(FieldArray &u) const;

 private:
  std::shared_ptr<const Grid> grid_;
  Real mu_;
  Real dt_;
  FieldArray phase_;
};

/// u <- u exp(i tau |u|^{2 sigma})
void nonlinear_phase(FieldArray &u, Real sigma, Real tau);

/// One Strang step N(dt/2) L(dt) N(dt/2); `nonlinearity` scales the
/// nonlinear phase (0 gives the linear flow).
void strang_step(FieldArray &u, const LinearPropagator &linear, Real sigma,
                 Real nonlinearity);

/// `steps` consecutive Strang steps with the inner half steps merged.
void strang_steps(FieldArray &u, const LinearPropagator &linear, Real sigma,
                  Real nonlinearity, Index steps);

enum class RunStatus { running, blowup_detected, completed, failed };
enum class BlowupTrigger { none, lap_growth, dt_underflow, refinement_cap };

std::string to_string(RunStatus s);
std::string to_string(BlowupTrigger t);

struct SolverConfig {
  Real sigma = 1.0;
  Real mu = 0.0;
  Real nonlinearity = 1.0;
  Real dt0 = 1e-3;
  Real dt_min = 1e-12;
  Real dt_max = 1e-2;
  Real t_end = 1.0;
  Real mass_tol = 1e-6;
  Real energy_tol = 1e-5;
  /// Largest accepted energy change per step, relative to the current size
  /// of the energy terms, max(1, |E0|, lap_sq/2 + |mu| grad_sq/2 + pot/(2 sigma + 2)).
  Real step_energy_tol = 1e-7;
  /// Conservation is checked after blocks of this many steps; a failed block
  /// is redone with dt halved. Must divide snapshot_every.
  Index check_every = 1;
  Real growth_factor = 1e3;
  bool adaptive = true;
  Index snapshot_every = 10;
  /// Keep the full field every k-th snapshot (0 disables).
  Index field_every = 10;
  std::size_t field_memory_cap = std::size_t{1} << 30;
  /// Spectral mass fraction in the outer eighth of the modes that stops the
  /// run as unresolved (0 disables).
  Real resolution_tol = 0.0;
  Index max_steps = 0;

  void validate() const;
};

struct StoredField {
  Index snapshot = 0;
  Real t = 0.0;
  FieldArray values;
};

struct Trajectory {
  std::vector<FunctionalSnapshot> snapshots;
  std::vector<StoredField> fields;
  bool fields_truncated = false;
};

struct SimState {
  Field field;
  Real t = 0.0;
  Real dt = 0.0;
  RunStatus status = RunStatus::running;
  BlowupTrigger trigger = BlowupTrigger::none;
  std::string message;

  Index step_count = 0;
  Index good_streak = 0;
  Real mass0 = 0.0;
  Real energy0 = 0.0;
  Real lap0 = 0.0;
  Real energy_prev = 0.0;
  Real nonlinearity = 1.0;
  /// Largest relative mass found in the outer tenth of the domain.
  Real boundary_mass_fraction = 0.0;
  Real spectral_tail = 0.0;
};

/// Called at every snapshot with the current state.
using SnapshotObserver =
    std::function<void(const SimState &, const FunctionalSnapshot &)>;

SimState initial_state(const SolverConfig &config, Field u0);

/// Advances one accepted step with the state's dt (no adaptivity).
void step(SimState &state, const SolverConfig &config);

/// Runs until t_end, detection, failure or max_steps. The trajectory receives
/// the initial snapshot if it is empty.
void evolve(const SolverConfig &config, SimState &state, Trajectory &traj,
            const SnapshotObserver &observer = {});

struct BlowupVerdict {
  bool detected = false;
  /// "finite_time", "infinite_time" or "none".
  std::string branch = "none";
  std::optional<Real> t_star_estimate;
  std::optional<Real> growth_exponent;
  BlowupTrigger trigger = BlowupTrigger::none;
  Real growth_ratio = 1.0;
  Index window = 0;
  Real fit_rms = 0.0;
};

struct DetectorOptions {
  Real growth_factor = 1e3;
  /// Fraction of the history (by samples) used for the fit.
  Real window_fraction = 0.5;
  Index min_samples = 10;
};

/// Fits log lap_sq = a - p log(T - t) on the trailing window.
BlowupVerdict detect_blowup(const std::vector<Real> &t,
                            const std::vector<Real> &lap_sq,
                            const DetectorOptions &options = {});
BlowupVerdict detect_blowup(const Trajectory &traj,
                            const DetectorOptions &options = {});

}  // namespace bnls

#endif  // BNLS_SOLVER_HPP_
