#ifndef BNLS_HARNESS_HPP_
#define BNLS_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bnls/diagnostics.hpp"
#include "bnls/groundstate.hpp"
#include "bnls/solver.hpp"

namespace bnls {

/*
 * Flat run configuration. Every key of the JSON form is listed in
 * config_keys(); unknown keys are rejected.
 *
 * Initial-condition families (key "ic"):
 *   gaussian                   ic_amplitude, ic_width, ic_chirp
 *   ring                       ic_amplitude, ic_r0, ic_width
 *   ground_state_perturbation  (1 + ic_epsilon) Q(|x|)
 *   random                     sum of random bumps, amplitude ic_amplitude, seeded
 */
struct SimConfig {
  std::string name = "custom";
  /// "evolve" or "inequality-suite"
  std::string mode = "evolve";

  int d = 4;
  Real sigma = 1.0;
  Real mu = 0.0;
  Real nonlinearity = 1.0;

  Index n_r = 128;
  Index n_z = 128;
  Real r_max = 12.0;
  Real z_max = 12.0;
  std::vector<Real> R_list{4.0, 8.0, 16.0};

  Real dt0 = 1e-4;
  Real dt_min = 1e-12;
  Real dt_max = 1e-3;
  Real t_end = 1.0;
  bool adaptive = true;
  Index max_steps = 0;

  Real mass_tol = 1e-6;
  Real energy_tol = 1e-5;
  Real step_energy_tol = 1e-7;
  Index check_every = 1;
  Real growth_factor = 1e3;
  Real resolution_tol = 0.0;
  /// Largest tolerated relative mass in the outer tenth of the domain.
  Real boundary_mass_tol = 1e-8;

  Index snapshot_every = 10;
  Index field_every = 10;
  /// Checkpoint every k-th snapshot (0: only at the end).
  Index checkpoint_every = 0;

  /// Constant for mu < 0 in the supercritical criterion.
  Real chi = 1.0;
  /// Virial error-term constant; calibrated on random fields when absent.
  std::optional<Real> virial_C;

  std::string ic = "gaussian";
  Real ic_amplitude = 1.0;
  Real ic_width = 1.0;
  Real ic_chirp = 0.0;
  Real ic_r0 = 0.0;
  Real ic_epsilon = 0.0;

  Index gs_n_r = 256;
  Real gs_r_max = 40.0;

  Index suite_samples = 1000;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
};

/// Field-level configuration errors, one line each.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string> &issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

std::vector<std::string> config_keys();
void validate(const SimConfig &config);
nlohmann::ordered_json to_json(const SimConfig &config);
/// Missing keys keep their defaults (from `base`).
SimConfig config_from_json(const nlohmann::json &j, const SimConfig &base = {});
SimConfig load_config(const std::filesystem::path &path);

struct PresetInfo {
  std::string name;
  std::string description;
};
std::vector<PresetInfo> preset_list();
/// Throws InvalidArgument naming the available presets.
SimConfig preset(const std::string &name);

SolverConfig solver_config(const SimConfig &config);
std::shared_ptr<const Grid> make_grid(const SimConfig &config);
Field initial_field(const SimConfig &config, std::shared_ptr<const Grid> grid);

/// Gaussians, rings and random bumps on a grid of the run's extent, seeded
/// away from every other use of `seed`.
std::vector<Field> calibration_family(const SimConfig &config, Index count = 24);

struct RunOutcome {
  SimState state;
  Trajectory trajectory;
  BlowupVerdict verdict;
  CriterionReport criterion;
  std::optional<ThresholdSet> thresholds;
  std::vector<VirialSeries> virial;
  Real virial_C = 0.0;
  Real mass_drift = 0.0;
  Real energy_drift = 0.0;
  bool boundary_flag = false;
  std::optional<InequalitySuiteResult> suite;
  int exit_code = 0;
};

struct RunOptions {
  bool write_outputs = true;
  bool quiet = true;
  std::function<void(const std::string &)> log;
};

/*
 * criterion check -> evolve -> diagnostics. Writes into config.output_dir:
 * trajectory.csv, virial_R<R>.csv, virial.json, verdict.json,
 * criterion.json, manifest.json, checkpoint.bin.
 */
RunOutcome run_scenario(const SimConfig &config, const RunOptions &options = {});

/// Continues from a checkpoint to config.t_end. The trajectory starts at the
/// checkpoint time.
RunOutcome resume_scenario(const SimConfig &config,
                           const std::filesystem::path &checkpoint,
                           const RunOptions &options = {});

/// Hash of the grid parameters and nodes.
std::string grid_fingerprint(const Grid &grid);

void write_trajectory_csv(std::ostream &os, const Trajectory &traj,
                          const std::vector<Real> &virial);

nlohmann::ordered_json to_json(const BlowupVerdict &v);
nlohmann::ordered_json to_json(const CriterionReport &r);
nlohmann::ordered_json to_json(const InequalitySuiteResult &r);

}  // namespace bnls

#endif  // BNLS_HARNESS_HPP_
