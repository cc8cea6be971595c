#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bnls/checkpoint.hpp"
#include "bnls/harness.hpp"

using namespace bnls;

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool quiet = false;
};

SimConfig resolve(const Common &c) {
  if (!c.config.empty() && !c.preset.empty())
    throw InvalidArgument("give either --config or --preset, not both");
  SimConfig cfg;
  if (!c.config.empty())
    cfg = load_config(c.config);
  else if (!c.preset.empty())
    cfg = preset(c.preset);
  else
    throw InvalidArgument("run needs --config <path> or --preset <name>");
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.seed_set) cfg.seed = c.seed;
  validate(cfg);
  return cfg;
}

void summarize(const RunOutcome &out, const SimConfig &cfg) {
  if (out.suite) {
    for (const auto &t : out.suite->tallies)
      std::cout << t.name << ": " << t.violations << " violations in " << t.samples
                << " samples (worst relative margin " << t.worst_relative_margin << ")\n";
    std::cout << "max tail ratio " << out.suite->max_tail_ratio << "\n"
              << (out.suite->passed ? "passed" : "FAILED") << "\n";
    return;
  }
  std::cout << "status " << to_string(out.state.status) << " (" << out.state.message
            << ") at t=" << out.state.t << " after " << out.state.step_count << " steps\n"
            << "criterion " << out.criterion.clause << ": "
            << (out.criterion.satisfied ? "satisfied" : "not satisfied") << "\n"
            << "blowup detected " << (out.verdict.detected ? "yes" : "no") << " ("
            << out.verdict.branch << ")\n"
            << "mass drift " << out.mass_drift << ", energy drift " << out.energy_drift << "\n";
  for (const auto &s : out.virial)
    std::cout << "virial R=" << s.R << ": " << s.interior_violations << " interior violations\n";
  if (out.boundary_flag) std::cout << "warning: mass reached the outer tenth of the domain\n";
  std::cout << "outputs in " << cfg.output_dir << "\n";
}

RunOptions run_options(bool quiet) {
  RunOptions o;
  o.quiet = quiet;
  o.log = [](const std::string &m) { std::cerr << m << "\n"; };
  return o;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Cylindrically symmetric biharmonic NLS solver"};
  app.require_subcommand(1);
  Common common;

  auto *run = app.add_subcommand("run", "run a scenario from a preset or config file");
  run->add_option("--config", common.config, "JSON config file");
  run->add_option("--preset", common.preset, "preset name (see preset-list)");
  run->add_option("--out", common.out, "output directory");
  auto *seed_opt = run->add_option("--seed", common.seed, "random seed");
  run->add_flag("--quiet", common.quiet, "no progress output");

  auto *list = app.add_subcommand("preset-list", "list presets");
  std::string show;
  list->add_option("--show", show, "print the full config of one preset as JSON");

  auto *gs = app.add_subcommand("ground-state", "compute the radial ground state");
  int gs_d = 4;
  double gs_sigma = 1.0;
  Index gs_n = 256;
  double gs_rmax = 40.0;
  std::string gs_out = "out/ground-state";
  gs->add_option("--d", gs_d, "dimension")->capture_default_str();
  gs->add_option("--sigma", gs_sigma, "nonlinearity exponent")->capture_default_str();
  gs->add_option("--n-r", gs_n, "radial nodes")->capture_default_str();
  gs->add_option("--r-max", gs_rmax, "radial extent")->capture_default_str();
  gs->add_option("--out", gs_out, "output directory")->capture_default_str();
  bool gs_quiet = false;
  gs->add_flag("--quiet", gs_quiet, "no summary");

  auto *ineq = app.add_subcommand("verify-inequalities", "run the inequality suite");
  Common ineq_common;
  Index samples = 1000;
  int ineq_d = 4;
  ineq->add_option("--samples", samples, "random fields")->capture_default_str();
  ineq->add_option("--d", ineq_d, "dimension")->capture_default_str();
  ineq->add_option("--out", ineq_common.out, "output directory");
  auto *ineq_seed = ineq->add_option("--seed", ineq_common.seed, "random seed");
  ineq->add_flag("--quiet", ineq_common.quiet, "no summary");

  auto *resume = app.add_subcommand("resume", "continue a run from its checkpoint");
  std::string resume_dir;
  double t_end = 0.0;
  std::string resume_config;
  bool resume_quiet = false;
  resume->add_option("--out", resume_dir, "run directory (manifest.json, checkpoint.bin)")
      ->required();
  resume->add_option("--config", resume_config, "config to use instead of the manifest copy");
  resume->add_option("--t-end", t_end, "new final time");
  resume->add_flag("--quiet", resume_quiet, "no progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      common.seed_set = seed_opt->count() > 0;
      const SimConfig cfg = resolve(common);
      const RunOutcome out = run_scenario(cfg, run_options(common.quiet));
      if (!common.quiet) summarize(out, cfg);
      return out.exit_code;
    }
    if (*list) {
      if (!show.empty()) {
        std::cout << std::setw(2) << to_json(preset(show)) << "\n";
        return 0;
      }
      for (const auto &p : preset_list()) std::cout << p.name << "\t" << p.description << "\n";
      return 0;
    }
    if (*gs) {
      GroundStateOptions o;
      o.n_r = gs_n;
      o.r_max = gs_rmax;
      const GroundStateResult q = solve_ground_state(gs_d, gs_sigma, o);
      std::filesystem::create_directories(gs_out);
      {
        std::ofstream os(std::filesystem::path(gs_out) / "ground_state.csv");
        write_ground_state_csv(os, q);
      }
      nlohmann::ordered_json j;
      j["d"] = q.d;
      j["sigma"] = q.sigma;
      j["iterations"] = q.iterations;
      j["residual"] = q.residual;
      j["mass_Q"] = q.mass_Q;
      j["energy_Q"] = q.energy_Q;
      j["lap_Q_sq"] = q.lap_Q_sq;
      j["pot_Q"] = q.pot_Q;
      j["s_c"] = q.s_c;
      j["pohozaev_defect"] = q.pohozaev_defect;
      j["negativity"] = q.negativity;
      j["monotonicity_defect"] = q.monotonicity_defect;
      j["threshold_lap"] = q.threshold_lap;
      j["threshold_EM"] = q.threshold_EM ? nlohmann::ordered_json(*q.threshold_EM)
                                         : nlohmann::ordered_json(nullptr);
      std::ofstream(std::filesystem::path(gs_out) / "ground_state.json") << std::setw(2) << j
                                                                         << "\n";
      if (!gs_quiet) std::cout << std::setw(2) << j << "\n";
      return 0;
    }
    if (*ineq) {
      SimConfig cfg = preset("inequality-suite");
      cfg.suite_samples = samples;
      cfg.d = ineq_d;
      cfg.output_dir = ineq_common.out.empty() ? "out/inequality-suite" : ineq_common.out;
      if (ineq_seed->count() > 0) cfg.seed = ineq_common.seed;
      const RunOutcome out = run_scenario(cfg, run_options(ineq_common.quiet));
      if (!ineq_common.quiet) summarize(out, cfg);
      return out.exit_code;
    }
    if (*resume) {
      const std::filesystem::path dir = resume_dir;
      SimConfig cfg;
      if (!resume_config.empty()) {
        cfg = load_config(resume_config);
      } else {
        std::ifstream is(dir / "manifest.json");
        if (!is) throw InvalidArgument("resume: no manifest.json in " + dir.string());
        cfg = config_from_json(nlohmann::json::parse(is).at("config"));
      }
      cfg.output_dir = dir.string();
      if (t_end > 0.0) cfg.t_end = t_end;
      cfg.max_steps = 0;
      const RunOutcome out =
          resume_scenario(cfg, dir / "checkpoint.bin", run_options(resume_quiet));
      if (!resume_quiet) summarize(out, cfg);
      return out.exit_code;
    }
  } catch (const ConfigError &e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const CheckpointError &e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
