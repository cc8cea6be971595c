#include "bnls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "bnls/checkpoint.hpp"
#include "bnls/initial_conditions.hpp"

#ifndef BNLS_VERSION
#define BNLS_VERSION "unknown"
#endif

namespace bnls {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string join(const std::vector<std::string> &lines) {
  std::string out = "invalid configuration:";
  for (const auto &l : lines) out += "\n  " + l;
  return out;
}

template <typename T>
void read_key(const json &j, const char *key, T &target,
              std::vector<std::string> &issues) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception &) {
    issues.push_back(std::string(key) + ": wrong type (" + j.at(key).type_name() + ")");
  }
}

void write_json(const std::filesystem::path &path, const ojson &j) {
  std::ofstream os(path);
  os << std::setw(2) << j << '\n';
}

Real rel_drift(Real value, Real ref) {
  return std::abs(value - ref) / std::max(std::abs(ref), 1e-300);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : InvalidArgument(join(issues)), issues_(std::move(issues)) {}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  const ojson defaults = to_json(SimConfig{});
  for (const auto &item : defaults.items()) keys.push_back(item.key());
  return keys;
}

ojson to_json(const SimConfig &c) {
  ojson j;
  j["name"] = c.name;
  j["mode"] = c.mode;
  j["d"] = c.d;
  j["sigma"] = c.sigma;
  j["mu"] = c.mu;
  j["nonlinearity"] = c.nonlinearity;
  j["n_r"] = c.n_r;
  j["n_z"] = c.n_z;
  j["r_max"] = c.r_max;
  j["z_max"] = c.z_max;
  j["R_list"] = c.R_list;
  j["dt0"] = c.dt0;
  j["dt_min"] = c.dt_min;
  j["dt_max"] = c.dt_max;
  j["t_end"] = c.t_end;
  j["adaptive"] = c.adaptive;
  j["max_steps"] = c.max_steps;
  j["mass_tol"] = c.mass_tol;
  j["energy_tol"] = c.energy_tol;
  j["step_energy_tol"] = c.step_energy_tol;
  j["check_every"] = c.check_every;
  j["growth_factor"] = c.growth_factor;
  j["resolution_tol"] = c.resolution_tol;
  j["boundary_mass_tol"] = c.boundary_mass_tol;
  j["snapshot_every"] = c.snapshot_every;
  j["field_every"] = c.field_every;
  j["checkpoint_every"] = c.checkpoint_every;
  j["chi"] = c.chi;
  j["virial_C"] = c.virial_C ? ojson(*c.virial_C) : ojson(nullptr);
  j["ic"] = c.ic;
  j["ic_amplitude"] = c.ic_amplitude;
  j["ic_width"] = c.ic_width;
  j["ic_chirp"] = c.ic_chirp;
  j["ic_r0"] = c.ic_r0;
  j["ic_epsilon"] = c.ic_epsilon;
  j["gs_n_r"] = c.gs_n_r;
  j["gs_r_max"] = c.gs_r_max;
  j["suite_samples"] = c.suite_samples;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j;
}

SimConfig config_from_json(const json &j, const SimConfig &base) {
  std::vector<std::string> issues;
  if (!j.is_object()) throw ConfigError({"top level: expected an object of key/value pairs"});
  const auto keys = config_keys();
  for (const auto &item : j.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
      issues.push_back(item.key() + ": unknown key");
    else if (item.value().is_object())
      issues.push_back(item.key() + ": nested objects are not allowed");
  }
  SimConfig c = base;
  read_key(j, "name", c.name, issues);
  read_key(j, "mode", c.mode, issues);
  read_key(j, "d", c.d, issues);
  read_key(j, "sigma", c.sigma, issues);
  read_key(j, "mu", c.mu, issues);
  read_key(j, "nonlinearity", c.nonlinearity, issues);
  read_key(j, "n_r", c.n_r, issues);
  read_key(j, "n_z", c.n_z, issues);
  read_key(j, "r_max", c.r_max, issues);
  read_key(j, "z_max", c.z_max, issues);
  read_key(j, "R_list", c.R_list, issues);
  read_key(j, "dt0", c.dt0, issues);
  read_key(j, "dt_min", c.dt_min, issues);
  read_key(j, "dt_max", c.dt_max, issues);
  read_key(j, "t_end", c.t_end, issues);
  read_key(j, "adaptive", c.adaptive, issues);
  read_key(j, "max_steps", c.max_steps, issues);
  read_key(j, "mass_tol", c.mass_tol, issues);
  read_key(j, "energy_tol", c.energy_tol, issues);
  read_key(j, "step_energy_tol", c.step_energy_tol, issues);
  read_key(j, "check_every", c.check_every, issues);
  read_key(j, "growth_factor", c.growth_factor, issues);
  read_key(j, "resolution_tol", c.resolution_tol, issues);
  read_key(j, "boundary_mass_tol", c.boundary_mass_tol, issues);
  read_key(j, "snapshot_every", c.snapshot_every, issues);
  read_key(j, "field_every", c.field_every, issues);
  read_key(j, "checkpoint_every", c.checkpoint_every, issues);
  read_key(j, "chi", c.chi, issues);
  if (j.contains("virial_C")) {
    if (j["virial_C"].is_null()) {
      c.virial_C.reset();
    } else {
      Real v = 0.0;
      read_key(j, "virial_C", v, issues);
      c.virial_C = v;
    }
  }
  read_key(j, "ic", c.ic, issues);
  read_key(j, "ic_amplitude", c.ic_amplitude, issues);
  read_key(j, "ic_width", c.ic_width, issues);
  read_key(j, "ic_chirp", c.ic_chirp, issues);
  read_key(j, "ic_r0", c.ic_r0, issues);
  read_key(j, "ic_epsilon", c.ic_epsilon, issues);
  read_key(j, "gs_n_r", c.gs_n_r, issues);
  read_key(j, "gs_r_max", c.gs_r_max, issues);
  read_key(j, "suite_samples", c.suite_samples, issues);
  read_key(j, "seed", c.seed, issues);
  read_key(j, "output_dir", c.output_dir, issues);
  if (!issues.empty()) throw ConfigError(issues);
  validate(c);
  return c;
}

SimConfig load_config(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError({"config: cannot open " + path.string()});
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error &e) {
    throw ConfigError({std::string("config: parse error: ") + e.what()});
  }
  return config_from_json(j);
}

void validate(const SimConfig &c) {
  std::vector<std::string> bad;
  auto check = [&](bool ok, const std::string &msg) {
    if (!ok) bad.push_back(msg);
  };
  check(c.mode == "evolve" || c.mode == "inequality-suite",
        "mode: must be \"evolve\" or \"inequality-suite\"");
  check(c.d >= 3, "d: must be >= 3");
  check(c.sigma > 0.0, "sigma: must be positive");
  if (c.d >= 5)
    check(c.sigma < 4.0 / (c.d - 4),
          "sigma: must be below 4/(d-4) = " + std::to_string(4.0 / (c.d - 4)) + " for d >= 5");
  check(std::isfinite(c.mu), "mu: must be finite");
  check(c.nonlinearity >= 0.0, "nonlinearity: must be >= 0");
  check(c.n_r >= 16, "n_r: must be >= 16");
  check(c.n_z >= 16 && c.n_z % 2 == 0, "n_z: must be even and >= 16");
  check(c.r_max > 0.0, "r_max: must be positive");
  check(c.z_max > 0.0, "z_max: must be positive");
  check(!c.R_list.empty(), "R_list: must not be empty");
  for (Real R : c.R_list) check(R > 0.0, "R_list: radii must be positive");
  check(c.dt_min > 0.0, "dt_min: must be positive");
  check(c.dt_min < c.dt0, "dt0: must exceed dt_min");
  check(c.dt0 <= c.dt_max, "dt0: must not exceed dt_max");
  check(c.t_end > 0.0, "t_end: must be positive");
  check(c.max_steps >= 0, "max_steps: must be >= 0");
  check(c.mass_tol > 0.0, "mass_tol: must be positive");
  check(c.energy_tol > 0.0, "energy_tol: must be positive");
  check(c.step_energy_tol > 0.0, "step_energy_tol: must be positive");
  check(c.growth_factor > 1.0, "growth_factor: must exceed 1");
  check(c.resolution_tol >= 0.0, "resolution_tol: must be >= 0");
  check(c.boundary_mass_tol > 0.0, "boundary_mass_tol: must be positive");
  check(c.snapshot_every >= 1, "snapshot_every: must be >= 1");
  check(c.check_every >= 1 && c.snapshot_every % std::max<Index>(c.check_every, 1) == 0,
        "check_every: must be >= 1 and divide snapshot_every");
  check(c.field_every >= 0, "field_every: must be >= 0");
  check(c.checkpoint_every >= 0, "checkpoint_every: must be >= 0");
  check(c.chi > 0.0, "chi: must be positive");
  if (c.virial_C) check(*c.virial_C >= 0.0, "virial_C: must be >= 0");
  check(c.ic == "gaussian" || c.ic == "ring" || c.ic == "ground_state_perturbation" ||
            c.ic == "random",
        "ic: must be one of gaussian, ring, ground_state_perturbation, random");
  check(c.ic_width > 0.0, "ic_width: must be positive");
  check(c.ic_r0 >= 0.0, "ic_r0: must be >= 0");
  check(c.ic_epsilon > -1.0, "ic_epsilon: must exceed -1");
  check(c.gs_n_r >= 16, "gs_n_r: must be >= 16");
  check(c.gs_r_max > 0.0, "gs_r_max: must be positive");
  check(c.suite_samples >= 1, "suite_samples: must be >= 1");
  check(!c.output_dir.empty(), "output_dir: must not be empty");
  if (!bad.empty()) throw ConfigError(bad);
}

std::vector<PresetInfo> preset_list() {
  return {
      {"mc-neg-energy", "d=4, sigma=1, mu=0, 7 exp(-|x|^2/2): mass-critical, E < 0"},
      {"linear-sanity", "nonlinearity off, unitary flow, conservation to 1e-10"},
      {"supercritical-mu-pos", "d=5, sigma=1, mu=1, negative-energy Gaussian"},
      {"supercritical-threshold",
       "d=5, sigma=1, mu=0, (1 + eps) Q with E >= 0 below the ground-state thresholds"},
      {"inequality-suite", "no evolution; inequality verifiers on random fields"},
  };
}

SimConfig preset(const std::string &name) {
  SimConfig c;
  c.name = name;
  c.output_dir = "out/" + name;
  if (name == "mc-neg-energy") {
    c.d = 4;
    c.sigma = 1.0;
    c.mu = 0.0;
    c.n_r = c.n_z = 512;
    c.r_max = c.z_max = 12.0;
    c.ic = "gaussian";
    c.ic_amplitude = 7.0;
    c.ic_width = 1.0;
    c.dt0 = 1e-4;
    c.dt_max = 1e-3;
    c.t_end = 2.0;
    c.check_every = 10;
    c.snapshot_every = 20;
    c.field_every = 0;
    c.step_energy_tol = 1e-7;
    // The energy is a difference of terms 1e5 times |E0| near detection.
    c.energy_tol = 100.0;
    c.mass_tol = 1e-5;
  } else if (name == "linear-sanity") {
    c.d = 4;
    c.nonlinearity = 0.0;
    c.mu = 0.5;
    c.n_r = c.n_z = 64;
    c.r_max = c.z_max = 20.0;
    c.ic = "gaussian";
    c.ic_amplitude = 1.0;
    c.ic_width = 2.0;
    c.adaptive = false;
    c.dt0 = c.dt_max = 2e-5;
    c.dt_min = 1e-6;
    c.t_end = 0.2;
    c.snapshot_every = 100;
    c.field_every = 0;
    c.mass_tol = 1e-10;
    c.energy_tol = 1e-10;
    c.step_energy_tol = 1e-10;
  } else if (name == "supercritical-mu-pos") {
    c.d = 5;
    c.sigma = 1.0;
    c.mu = 1.0;
    c.n_r = c.n_z = 256;
    c.r_max = c.z_max = 16.0;
    c.ic = "gaussian";
    c.ic_amplitude = 6.5;
    c.ic_width = 1.5;
    c.dt0 = 1e-4;
    c.dt_max = 1e-3;
    c.t_end = 2.0;
    c.check_every = 10;
    c.snapshot_every = 20;
    c.field_every = 0;
    c.energy_tol = 100.0;
    c.mass_tol = 1e-5;
  } else if (name == "supercritical-threshold") {
    c.d = 5;
    c.sigma = 1.0;
    c.mu = 0.0;
    c.n_r = c.n_z = 256;
    c.r_max = c.z_max = 16.0;
    c.ic = "ground_state_perturbation";
    c.ic_epsilon = 0.05;
    c.dt0 = 1e-4;
    c.dt_max = 1e-3;
    c.t_end = 0.5;
    c.check_every = 10;
    c.snapshot_every = 20;
    c.field_every = 0;
    c.energy_tol = 100.0;
    c.mass_tol = 1e-5;
  } else if (name == "inequality-suite") {
    c.mode = "inequality-suite";
    c.d = 4;
    c.sigma = 1.0;
    c.suite_samples = 1000;
  } else {
    std::string names;
    for (const auto &p : preset_list()) names += (names.empty() ? "" : ", ") + p.name;
    throw InvalidArgument("unknown preset '" + name + "'; available: " + names);
  }
  validate(c);
  return c;
}

SolverConfig solver_config(const SimConfig &c) {
  SolverConfig s;
  s.sigma = c.sigma;
  s.mu = c.mu;
  s.nonlinearity = c.nonlinearity;
  s.dt0 = c.dt0;
  s.dt_min = c.dt_min;
  s.dt_max = c.dt_max;
  s.t_end = c.t_end;
  s.mass_tol = c.mass_tol;
  s.energy_tol = c.energy_tol;
  s.step_energy_tol = c.step_energy_tol;
  s.check_every = c.check_every;
  s.growth_factor = c.growth_factor;
  s.adaptive = c.adaptive;
  s.snapshot_every = c.snapshot_every;
  s.field_every = c.field_every;
  s.resolution_tol = c.resolution_tol;
  s.max_steps = c.max_steps;
  return s;
}

std::shared_ptr<const Grid> make_grid(const SimConfig &c) {
  return std::make_shared<const Grid>(build_grid(c.d, c.r_max, c.n_r, c.z_max, c.n_z));
}

namespace {

GroundStateResult ground_state_for(const SimConfig &c) {
  GroundStateOptions o;
  o.n_r = c.gs_n_r;
  o.r_max = c.gs_r_max;
  return solve_ground_state(c.d, c.sigma, o);
}

}  // namespace

Field initial_field(const SimConfig &c, std::shared_ptr<const Grid> grid) {
  if (c.ic == "gaussian") return gaussian_field(grid, c.ic_amplitude, c.ic_width, c.ic_chirp);
  if (c.ic == "ring") return ring_field(grid, c.ic_amplitude, c.ic_r0, c.ic_width);
  if (c.ic == "random") {
    std::mt19937_64 rng(c.seed);
    RandomFieldOptions ro;
    ro.amplitude = c.ic_amplitude;
    return random_field(grid, rng, ro);
  }
  if (c.ic == "ground_state_perturbation") {
    const GroundStateResult q = ground_state_for(c);
    return radial_profile_field(grid, *q.basis, q.profile, 1.0 + c.ic_epsilon);
  }
  throw InvalidArgument("initial_field: unknown family '" + c.ic + "'");
}

std::vector<Field> calibration_family(const SimConfig &c, Index count) {
  const Index n_r = std::min<Index>(c.n_r, 128);
  const Index n_z = std::min<Index>(c.n_z, 128);
  auto grid = std::make_shared<const Grid>(build_grid(c.d, c.r_max, n_r, c.z_max, n_z));
  std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<Real> unit(0.0, 1.0);
  const Real reach = 0.6 * std::min(c.r_max, c.z_max);
  std::vector<Field> family;
  for (Index i = 0; i < count; ++i) {
    const Real amplitude = 0.3 + 2.7 * unit(rng);
    const Real width = 0.5 + (0.25 * reach - 0.5) * unit(rng);
    switch (i % 3) {
      case 0:
        family.push_back(gaussian_field(grid, amplitude, width, 2.0 * unit(rng) - 1.0));
        break;
      case 1: {
        const Real w = std::min(width, 2.0);
        family.push_back(ring_field(grid, amplitude, 3.0 * w + (reach - 3.0 * w) * unit(rng), w));
        break;
      }
      default: {
        RandomFieldOptions ro;
        ro.bumps = 1 + static_cast<int>(3 * unit(rng));
        ro.amplitude = amplitude;
        ro.min_width = 0.6;
        ro.max_width = 0.6 + 1.4 * unit(rng);
        ro.max_center_r = reach * unit(rng);
        ro.max_center_z = 3.0;
        ro.max_momentum = 1.5 * unit(rng);
        family.push_back(random_field(grid, rng, ro));
      }
    }
  }
  return family;
}

std::string grid_fingerprint(const Grid &g) {
  std::vector<std::uint8_t> bytes;
  auto put = [&](const void *p, std::size_t n) {
    const auto *b = static_cast<const std::uint8_t *>(p);
    bytes.insert(bytes.end(), b, b + n);
  };
  put(&g.d, sizeof g.d);
  put(&g.n_r, sizeof g.n_r);
  put(&g.n_z, sizeof g.n_z);
  put(&g.r_max, sizeof g.r_max);
  put(&g.z_max, sizeof g.z_max);
  put(g.r_nodes.data(), sizeof(Real) * g.r_nodes.size());
  put(g.quad_weights.data(), sizeof(Real) * g.quad_weights.size());
  put(g.z_nodes.data(), sizeof(Real) * g.z_nodes.size());
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(bytes.data(), bytes.size());
  return os.str();
}

void write_trajectory_csv(std::ostream &os, const Trajectory &traj,
                          const std::vector<Real> &virial) {
  os << "t,mass,energy,grad_sq,lap_sq,pot,virial\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const auto &s = traj.snapshots[i];
    os << s.time << ',' << s.mass << ',' << s.energy << ',' << s.grad_sq << ','
       << s.lap_sq << ',' << s.pot << ',';
    if (i < virial.size()) os << virial[i];
    os << '\n';
  }
}

ojson to_json(const BlowupVerdict &v) {
  ojson j;
  j["detected"] = v.detected;
  j["branch"] = v.branch;
  j["trigger"] = to_string(v.trigger);
  j["t_star_estimate"] = v.t_star_estimate ? ojson(*v.t_star_estimate) : ojson(nullptr);
  j["growth_exponent"] = v.growth_exponent ? ojson(*v.growth_exponent) : ojson(nullptr);
  j["growth_ratio"] = v.growth_ratio;
  j["window"] = v.window;
  j["fit_rms"] = v.fit_rms;
  return j;
}

ojson to_json(const CriterionReport &r) {
  ojson j;
  j["clause"] = r.clause;
  j["description"] = r.description;
  j["satisfied"] = r.satisfied;
  j["within_hypotheses"] = r.within_hypotheses;
  j["s_c"] = r.s_c;
  ojson list = ojson::array();
  for (const auto &c : r.inequalities) {
    list.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs},
                    {"margin", c.margin}, {"holds", c.holds}});
  }
  j["inequalities"] = list;
  j["warnings"] = r.warnings;
  return j;
}

ojson to_json(const InequalitySuiteResult &r) {
  ojson j;
  ojson tallies = ojson::array();
  for (const auto &t : r.tallies) {
    tallies.push_back({{"name", t.name}, {"samples", t.samples},
                       {"violations", t.violations},
                       {"worst_relative_margin", t.worst_relative_margin}});
  }
  j["tallies"] = tallies;
  j["half_constant_failures"] = r.half_constant_failures;
  j["max_tail_ratio"] = r.max_tail_ratio;
  j["max_tail_ratio_by_radius"] = r.max_tail_ratio_by_radius;
  j["passed"] = r.passed;
  return j;
}

namespace {

ojson to_json(const VirialSeries &s) {
  ojson j;
  j["R"] = s.R;
  j["samples"] = s.reports.size();
  j["interior_violations"] = s.interior_violations;
  Real worst = std::numeric_limits<Real>::infinity();
  Real worst_t = 0.0;
  for (const auto &r : s.reports) {
    if (r.interior && r.margin < worst) {
      worst = r.margin;
      worst_t = r.t;
    }
  }
  j["worst_interior_margin"] = std::isfinite(worst) ? ojson(worst) : ojson(nullptr);
  j["worst_interior_t"] = worst_t;
  return j;
}

void write_virial_csv(const std::filesystem::path &path, const VirialSeries &s) {
  std::ofstream os(path);
  os << "t,M_phi,dMdt_numeric,dMdt_instant,rhs_main,rhs_main_e0,X_mu,err1,err2,err3,err4,C,"
        "tol_fd,split_bias,tol_split,rhs_total,margin,interior,holds\n";
  os << std::setprecision(17);
  for (const auto &r : s.reports) {
    os << r.t << ',' << r.M_phi << ',' << r.dMdt_numeric << ',' << r.dMdt_instant << ','
       << r.rhs_main << ',' << r.rhs_main_e0 << ',' << r.X_mu;
    for (Real e : r.err_terms.terms) os << ',' << e;
    os << ',' << r.C << ',' << r.tol_fd << ',' << r.split_bias << ',' << r.tol_split << ','
       << r.rhs_total << ',' << r.margin << ','
       << r.interior << ',' << r.holds << '\n';
  }
}

std::string radius_label(Real R) {
  std::ostringstream os;
  os << R;
  return os.str();
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

InequalitySuiteOptions suite_options(const SimConfig &c) {
  InequalitySuiteOptions o;
  o.samples = c.suite_samples;
  o.seed = c.seed;
  o.d = c.d;
  o.sigma = c.sigma;
  o.radii = c.R_list;
  return o;
}

// Criterion, thresholds and virial constant for a datum.
void prepare(const SimConfig &c, const Field &u0, RunOutcome &out) {
  const FunctionalSnapshot s0 = functionals(u0, c.mu, c.sigma, c.nonlinearity);
  const Real s_c = critical_index(c.d, c.sigma);
  if (s_c > 0.0 && s_c < 2.0) out.thresholds = thresholds(ground_state_for(c));
  if (c.nonlinearity == 0.0) {
    out.criterion.s_c = s_c;
    out.criterion.description = "linear flow; no blowup criterion applies";
    out.criterion.warnings.push_back("nonlinearity is off");
  } else {
    out.criterion = check_blowup_criteria(s0, c.mu, c.sigma, c.d, out.thresholds, c.chi);
  }
  out.virial_C = c.virial_C ? *c.virial_C
                            : calibrate_virial_constant(calibration_family(c), c.R_list, c.mu,
                                                        c.sigma, c.nonlinearity);
}

RunOutcome execute(const SimConfig &c, SimState state, const RunOptions &options,
                   const std::optional<std::filesystem::path> &resumed_from) {
  RunOutcome out;
  const std::filesystem::path dir = c.output_dir;
  auto log = [&](const std::string &msg) {
    if (!options.quiet && options.log) options.log(msg);
  };
  if (options.write_outputs) std::filesystem::create_directories(dir);

  prepare(c, state.field, out);
  log("criterion: " + out.criterion.clause + " (" + out.criterion.description + ")");
  log("virial C = " + std::to_string(out.virial_C));

  const SolverConfig sc = solver_config(c);
  std::vector<CutoffProfile> profiles;
  for (Real R : c.R_list) profiles.push_back(build_cutoff(*state.field.grid, R));
  out.virial.resize(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) out.virial[i].R = c.R_list[i];
  std::vector<Real> virial_column;
  Index snapshots_seen = 0;

  auto observer = [&](const SimState &st, const FunctionalSnapshot &snap) {
    auto reports = virial_samples(st.field, snap, profiles, c.mu, c.sigma, st.energy0,
                                  out.virial_C, st.nonlinearity);
    const auto bias =
        splitting_rate_bias(st.field, profiles, c.mu, c.sigma, st.nonlinearity, st.dt);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      reports[i].split_bias = bias[i];
      reports[i].snapshot = static_cast<Index>(virial_column.size());
      out.virial[i].reports.push_back(reports[i]);
    }
    virial_column.push_back(out.virial[0].reports.back().M_phi);
    ++snapshots_seen;
    if (options.write_outputs && c.checkpoint_every > 0 &&
        snapshots_seen % c.checkpoint_every == 0) {
      save_checkpoint(dir / "checkpoint.bin", st, c.mu, c.sigma);
    }
    if (snapshots_seen % 50 == 0) {
      std::ostringstream os;
      os << "t=" << snap.time << " dt=" << st.dt << " lap_sq/lap0=" << snap.lap_sq / st.lap0;
      log(os.str());
    }
  };

  const auto wall0 = std::chrono::steady_clock::now();
  evolve(sc, state, out.trajectory, observer);
  const Real wall =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - wall0).count();

  for (auto &series : out.virial) {
    if (series.reports.size() >= 3) finalize_virial_series(series);
  }
  DetectorOptions det;
  det.growth_factor = c.growth_factor;
  out.verdict = detect_blowup(out.trajectory, det);
  if (state.trigger != BlowupTrigger::none) out.verdict.trigger = state.trigger;

  for (const auto &s : out.trajectory.snapshots) {
    out.mass_drift = std::max(out.mass_drift, rel_drift(s.mass, state.mass0));
    out.energy_drift = std::max(out.energy_drift,
                                std::abs(s.energy - state.energy0) /
                                    std::max(1.0, std::abs(state.energy0)));
  }
  out.boundary_flag = state.boundary_mass_fraction > c.boundary_mass_tol;
  out.exit_code = state.status == RunStatus::failed ? 2 : 0;
  log("status: " + to_string(state.status) + " (" + state.message + ")");

  if (options.write_outputs) {
    save_checkpoint(dir / "checkpoint.bin", state, c.mu, c.sigma);
    {
      std::ofstream os(dir / "trajectory.csv");
      write_trajectory_csv(os, out.trajectory, virial_column);
    }
    ojson vj = ojson::array();
    for (const auto &series : out.virial) {
      write_virial_csv(dir / ("virial_R" + radius_label(series.R) + ".csv"), series);
      vj.push_back(to_json(series));
    }
    write_json(dir / "virial.json", {{"C", out.virial_C}, {"series", vj}});

    ojson verdict;
    verdict["status"] = to_string(state.status);
    verdict["message"] = state.message;
    verdict["t_final"] = state.t;
    verdict["dt_final"] = state.dt;
    verdict["steps"] = state.step_count;
    verdict["blowup"] = to_json(out.verdict);
    verdict["branch_note"] =
        "branch favoured by the fit; finite versus infinite time is not decided";
    verdict["mass_drift"] = out.mass_drift;
    verdict["energy_drift"] = out.energy_drift;
    verdict["boundary_mass_fraction"] = state.boundary_mass_fraction;
    verdict["boundary_flag"] = out.boundary_flag;
    write_json(dir / "verdict.json", verdict);

    ojson crit = to_json(out.criterion);
    if (out.thresholds) {
      crit["thresholds"] = {{"s_c", out.thresholds->s_c},
                            {"threshold_EM", out.thresholds->threshold_EM},
                            {"threshold_lap", out.thresholds->threshold_lap},
                            {"energy_Q", out.thresholds->energy_Q},
                            {"mass_Q", out.thresholds->mass_Q},
                            {"lap_Q_sq", out.thresholds->lap_Q_sq}};
    }
    write_json(dir / "criterion.json", crit);

    ojson manifest;
    manifest["config"] = to_json(c);
    manifest["version"] = BNLS_VERSION;
    manifest["grid_fingerprint"] = grid_fingerprint(*state.field.grid);
    manifest["resumed_from"] = resumed_from ? ojson(resumed_from->string()) : ojson(nullptr);
    manifest["created"] = timestamp();
    manifest["wall_seconds"] = wall;
    write_json(dir / "manifest.json", manifest);
  }
  out.state = std::move(state);
  return out;
}

}  // namespace

RunOutcome run_scenario(const SimConfig &config, const RunOptions &options) {
  validate(config);
  if (config.mode == "inequality-suite") {
    RunOutcome out;
    out.suite = run_inequality_suite(suite_options(config));
    out.exit_code = out.suite->passed ? 0 : 1;
    if (options.write_outputs) {
      std::filesystem::create_directories(config.output_dir);
      write_json(std::filesystem::path(config.output_dir) / "inequalities.json",
                 to_json(*out.suite));
      write_json(std::filesystem::path(config.output_dir) / "manifest.json",
                 {{"config", to_json(config)}, {"version", BNLS_VERSION},
                  {"created", timestamp()}});
    }
    return out;
  }
  auto grid = make_grid(config);
  SimState state = initial_state(solver_config(config), initial_field(config, grid));
  return execute(config, std::move(state), options, std::nullopt);
}

RunOutcome resume_scenario(const SimConfig &config,
                           const std::filesystem::path &checkpoint,
                           const RunOptions &options) {
  validate(config);
  Checkpoint ck = load_checkpoint(checkpoint);
  const Grid &g = *ck.state.field.grid;
  std::vector<std::string> bad;
  if (g.d != config.d) bad.push_back("d: checkpoint has " + std::to_string(g.d));
  if (g.n_r != config.n_r) bad.push_back("n_r: checkpoint has " + std::to_string(g.n_r));
  if (g.n_z != config.n_z) bad.push_back("n_z: checkpoint has " + std::to_string(g.n_z));
  if (g.r_max != config.r_max) bad.push_back("r_max: differs from checkpoint");
  if (g.z_max != config.z_max) bad.push_back("z_max: differs from checkpoint");
  if (ck.mu != config.mu) bad.push_back("mu: differs from checkpoint");
  if (ck.sigma != config.sigma) bad.push_back("sigma: differs from checkpoint");
  if (ck.state.nonlinearity != config.nonlinearity)
    bad.push_back("nonlinearity: differs from checkpoint");
  if (!bad.empty()) throw ConfigError(bad);
  ck.state.status = RunStatus::running;
  ck.state.trigger = BlowupTrigger::none;
  ck.state.message.clear();
  return execute(config, std::move(ck.state), options, checkpoint);
}

}  // namespace bnls
