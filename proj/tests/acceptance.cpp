// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status 1 if
// any fails. Scenario outputs go under --out.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "bnls/checkpoint.hpp"
#include "bnls/harness.hpp"
#include "bnls/initial_conditions.hpp"

using namespace bnls;
namespace fs = std::filesystem;

namespace {

constexpr Real pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char *spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string slurp(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

Real rel_l2(const Grid &g, const FieldArray &a, const FieldArray &b) {
  return std::sqrt(g.integrate((a - b).array().abs2()) / g.integrate(b.array().abs2()));
}

// Integrating-factor RK4, independent of the splitting.
void lawson_rk4(std::shared_ptr<const Grid> g, FieldArray &u, Real mu, Real sigma, Real h,
                int steps) {
  const LinearPropagator half(g, mu, 0.5 * h);
  auto nl = [&](const FieldArray &v) -> FieldArray {
    return (Complex(0.0, 1.0) * v.array().abs2().pow(sigma) * v.array()).matrix();
  };
  auto e_half = [&](FieldArray v) {
    half.apply(v);
    return v;
  };
  for (int s = 0; s < steps; ++s) {
    const FieldArray k1 = nl(u);
    const FieldArray k2 = nl(e_half(u + 0.5 * h * k1));
    const FieldArray eu = e_half(u);
    const FieldArray k3 = nl(eu + 0.5 * h * k2);
    const FieldArray k4 = nl(e_half(eu) + h * e_half(k3));
    u = e_half(e_half(u + h / 6.0 * k1)) + e_half(h / 3.0 * (k2 + k3)) + h / 6.0 * k4;
  }
}

struct Context {
  fs::path out;
  std::optional<RunOutcome> mc;
  std::optional<RunOutcome> linear;
  std::optional<RunOutcome> mu_pos;

  SimConfig scenario(const std::string &name) const {
    SimConfig c = preset(name);
    c.output_dir = (out / name).string();
    return c;
  }
  const RunOutcome &mc_run() {
    if (!mc) mc = run_scenario(scenario("mc-neg-energy"));
    return *mc;
  }
  const RunOutcome &linear_run() {
    if (!linear) linear = run_scenario(scenario("linear-sanity"));
    return *linear;
  }
  const RunOutcome &mu_pos_run() {
    if (!mu_pos) mu_pos = run_scenario(scenario("supercritical-mu-pos"));
    return *mu_pos;
  }
};

Outcome cutoff_certificate(Context &) {
  Timer timer;
  bool ok = true;
  Real worst = 1.0;
  Real max_rr = -1.0;
  for (int d : {4, 5}) {
    const Grid g = build_grid(d, 160.0, 512, 8.0, 16);
    for (Real R : {4.0, 8.0, 16.0}) {
      for (const CutoffCertificate &c :
           {certify_cutoff(build_cutoff(g, R), g), certify_cutoff_dense(d, R, 2000)}) {
        ok = ok && c.passed;
        worst = std::min({worst, c.min_one_minus_psi_rr, c.min_one_minus_psi_r_over_r,
                          c.min_dim_minus_lap});
        max_rr = std::max(max_rr, c.max_psi_rr);
      }
    }
  }
  const double s = timer.seconds();
  ok = ok && worst >= -1e-12 && max_rr <= 1.0 && s < 1.0;
  return {ok, "min of the three minima " + fmt("%.3e", worst) + ", max psi'' " +
                  fmt("%.6f", max_rr) + ", " + fmt("%.2f", s) + " s"};
}

Outcome operator_oracles(Context &) {
  Timer timer;
  auto g = std::make_shared<const Grid>(build_grid(4, 14.0, 512, 14.0, 512));
  const Field u = gaussian_field(g, 1.0, 1.0);
  const Field lap = laplacian(u);
  const Field bilap = laplacian(lap);
  Real lap_err = 0.0;
  Real bilap_err = 0.0;
  Real bilap_max = 0.0;
  for (Index j = 0; j < g->n_r; ++j) {
    for (Index k = 0; k < g->n_z; ++k) {
      const Real x2 = g->r_nodes(j) * g->r_nodes(j) + g->z_nodes(k) * g->z_nodes(k);
      const Real e = std::exp(-0.5 * x2);
      lap_err = std::max(lap_err, std::abs(lap.values(j, k) - (x2 - 4.0) * e));
      const Real exact = (x2 * x2 - 12.0 * x2 + 24.0) * e;
      bilap_err = std::max(bilap_err, std::abs(bilap.values(j, k) - exact));
      bilap_max = std::max(bilap_max, std::abs(exact));
    }
  }
  // Consecutive fields form the pairs of the symmetry check.
  std::mt19937_64 rng(404);
  Real sym = 0.0;
  Real quad = 0.0;
  Field a = random_field(g, rng);
  Field la = laplacian(a);
  for (int trial = 0; trial < 100; ++trial) {
    Field b = random_field(g, rng);
    Field lb = laplacian(b);
    const Complex x = inner_product(la, b);
    sym = std::max(sym, std::abs(x - inner_product(a, lb)) / std::abs(x));
    const Real l2 = inner_product(la, la).real();
    quad = std::max(quad, std::abs(inner_product(laplacian(la), a).real() - l2) / l2);
    a = std::move(b);
    la = std::move(lb);
  }
  const double s = timer.seconds();
  const bool ok = lap_err <= 1e-6 && bilap_err / bilap_max <= 1e-4 && sym <= 1e-8 &&
                  quad <= 1e-8 && s < 30.0;
  return {ok, "lap err " + fmt("%.2e", lap_err) + ", bilap rel err " +
                  fmt("%.2e", bilap_err / bilap_max) + ", symmetry " + fmt("%.2e", sym) +
                  ", quadratic form " + fmt("%.2e", quad) + ", " + fmt("%.1f", s) + " s"};
}

Outcome conservation(Context &ctx) {
  Timer timer;
  const RunOutcome &lin = ctx.linear_run();
  const bool lin_ok = lin.state.status == RunStatus::completed &&
                      lin.state.step_count >= 10000 && lin.mass_drift <= 1e-10 &&
                      lin.energy_drift <= 1e-10;

  auto g = std::make_shared<const Grid>(build_grid(4, 16.0, 64, 16.0, 64));
  SolverConfig cfg;
  cfg.dt0 = 1e-3;
  cfg.dt_max = 1e-2;
  cfg.t_end = 5.0;
  cfg.mass_tol = 1e-6;
  cfg.energy_tol = 1e-5;
  cfg.step_energy_tol = 1e-8;
  cfg.snapshot_every = 10;
  cfg.field_every = 0;
  SimState st = initial_state(cfg, gaussian_field(g, 0.5, 1.0));
  Trajectory traj;
  evolve(cfg, st, traj);
  Real dm = 0.0;
  Real de = 0.0;
  const auto &s0 = traj.snapshots.front();
  for (const auto &s : traj.snapshots) {
    dm = std::max(dm, std::abs(s.mass - s0.mass) / s0.mass);
    de = std::max(de, std::abs(s.energy - s0.energy) / std::abs(s0.energy));
  }
  const bool nl_ok = st.status == RunStatus::completed && dm <= 1e-6 && de <= 1e-5;
  const double s = timer.seconds();
  return {lin_ok && nl_ok && s < 300.0,
          "linear " + std::to_string(lin.state.step_count) + " steps, drift " +
              fmt("%.2e", std::max(lin.mass_drift, lin.energy_drift)) +
              "; nonlinear to t=" + fmt("%.2f", st.t) + " mass " + fmt("%.2e", dm) +
              ", energy " + fmt("%.2e", de) + "; " + fmt("%.0f", s) + " s"};
}

Outcome splitting_order(Context &) {
  auto g = std::make_shared<const Grid>(build_grid(4, 8.0, 40, 8.0, 40));
  const Field u0 = gaussian_field(g, 1.5, 1.0);
  const Real t_end = 0.1;
  FieldArray ref = u0.values;
  lawson_rk4(g, ref, 0.0, 1.0, t_end / 1600, 1600);
  std::vector<Real> err;
  for (int n : {40, 80, 160, 320}) {
    FieldArray u = u0.values;
    const LinearPropagator lin(g, 0.0, t_end / n);
    for (int k = 0; k < n; ++k) strang_step(u, lin, 1.0, 1.0);
    err.push_back(rel_l2(*g, u, ref));
  }
  bool ok = true;
  std::string slopes;
  for (std::size_t k = 1; k < err.size(); ++k) {
    const Real slope = std::log2(err[k - 1] / err[k]);
    ok = ok && std::abs(slope - 2.0) <= 0.2;
    slopes += (k > 1 ? ", " : "") + fmt("%.3f", slope);
  }
  return {ok, "slopes " + slopes + " (errors " + fmt("%.2e", err.front()) + " .. " +
                  fmt("%.2e", err.back()) + ")"};
}

Outcome mass_critical_blowup(Context &ctx) {
  Timer timer;
  const RunOutcome &r = ctx.mc_run();
  const double s = timer.seconds();
  const auto &snaps = r.trajectory.snapshots;
  const Real e0 = snaps.front().energy;
  const Real e_exact = -3.0625 * pi * pi;
  Real lap_max = 0.0;
  for (const auto &x : snaps) lap_max = std::max(lap_max, x.lap_sq);
  const Real growth = lap_max / snaps.front().lap_sq;
  const bool ok = std::abs(e0 - e_exact) <= 1e-8 * std::abs(e_exact) && growth >= 1e3 &&
                  r.mass_drift <= 1e-5 && r.verdict.detected && s < 900.0;
  return {ok, "E0 " + fmt("%.10f", e0) + " (closed form " + fmt("%.10f", e_exact) +
                  "), lap growth " + fmt("%.3g", growth) + " at t=" + fmt("%.5f", r.state.t) +
                  ", mass drift " + fmt("%.2e", r.mass_drift) + ", detector " +
                  (r.verdict.detected ? r.verdict.branch : std::string("none")) + ", " +
                  fmt("%.0f", s) + " s"};
}

Outcome virial_inequality(Context &ctx) {
  bool ok = true;
  std::string detail;
  const std::pair<const char *, const RunOutcome *> runs[] = {
      {"mc-neg-energy", &ctx.mc_run()},
      {"supercritical-mu-pos", &ctx.mu_pos_run()},
      {"linear-sanity", &ctx.linear_run()}};
  for (const auto &[name, r] : runs) {
    Index violations = 0;
    std::size_t samples = 0;
    for (const auto &series : r->virial) {
      violations += series.interior_violations;
      samples += series.reports.size();
    }
    ok = ok && violations == 0 && !r->virial.empty() && samples > 0;
    detail += std::string(detail.empty() ? "" : "; ") + name + " " +
              std::to_string(violations) + " violations in " + std::to_string(samples) +
              " samples (C " + fmt("%.2e", r->virial_C) + ")";
  }
  return {ok, detail};
}

Outcome mass_critical_core(Context &ctx) {
  SimConfig c;
  c.name = "core-bound";
  c.d = 4;
  c.n_r = c.n_z = 128;
  c.r_max = c.z_max = 12.0;
  c.ic_amplitude = 7.0;
  c.ic_width = 1.0;
  c.adaptive = false;
  c.dt0 = 1e-4;
  c.dt_max = 1e-4;
  c.t_end = 50 * 10 * 1e-4;
  c.snapshot_every = 10;
  c.field_every = 1;
  c.energy_tol = 1e-2;
  c.mass_tol = 1e-8;
  c.step_energy_tol = 1e-4;
  c.R_list = {8.0};
  c.virial_C = 1.0;
  c.output_dir = (ctx.out / "core-bound").string();
  const RunOutcome r = run_scenario(c);
  const Real bound = 16.0 * r.state.energy0;
  const Real tol = 0.01 * std::abs(bound);
  Real excess = -std::numeric_limits<Real>::infinity();
  Real instant_excess = excess;
  const auto &reps = r.virial.at(0).reports;
  const std::size_t n = std::min<std::size_t>(reps.size(), 51);
  for (std::size_t i = 0; i < n; ++i) {
    excess = std::max(excess, reps[i].dMdt_numeric - bound);
    instant_excess = std::max(instant_excess, reps[i].dMdt_instant - bound);
  }
  const bool ok = r.state.status == RunStatus::completed && n == 51 && excess <= tol;
  return {ok, "16 E0 " + fmt("%.4f", bound) + ", max dM/dt - 16 E0 " + fmt("%.3e", excess) +
                  " (instantaneous rate " + fmt("%.3e", instant_excess) + ", tol " +
                  fmt("%.3e", tol) + ") over " + std::to_string(n - 1) + " snapshots"};
}

Outcome ground_state(Context &) {
  bool ok = true;
  std::string detail;
  for (int d : {4, 5}) {
    Timer timer;
    GroundStateOptions o;
    o.n_r = 256;
    const GroundStateResult a = solve_ground_state(d, 1.0, o);
    o.n_r = 512;
    const GroundStateResult b = solve_ground_state(d, 1.0, o);
    const double s = timer.seconds();
    const Real res = a.residual / std::sqrt(a.mass_Q);
    const Real drift = std::max(std::abs(b.mass_Q - a.mass_Q) / a.mass_Q,
                                std::abs(b.lap_Q_sq - a.lap_Q_sq) / a.lap_Q_sq);
    ok = ok && res <= 1e-8 && b.residual <= 1e-8 * std::sqrt(b.mass_Q) &&
         std::abs(a.pohozaev_defect) <= 1e-6 && std::abs(b.pohozaev_defect) <= 1e-6 &&
         drift <= 1e-4 && s < 60.0;
    detail += std::string(detail.empty() ? "" : "; ") + "d=" + std::to_string(d) +
              " residual/|Q| " + fmt("%.1e", res) + ", identity " +
              fmt("%.1e", std::abs(a.pohozaev_defect)) + ", refinement drift " +
              fmt("%.1e", drift) + ", " + fmt("%.1f", s) + " s";
  }
  return {ok, detail};
}

Outcome inequality_suite(Context &ctx) {
  Timer timer;
  const RunOutcome r = run_scenario(ctx.scenario("inequality-suite"));
  const double s = timer.seconds();
  bool ok = r.suite.has_value() && r.suite->passed && s < 120.0;
  std::string detail;
  if (r.suite) {
    for (const auto &t : r.suite->tallies) {
      ok = ok && t.violations == 0 && t.samples >= 1000;
      detail += t.name + " " + std::to_string(t.violations) + "/" + std::to_string(t.samples) +
                ", ";
    }
    detail += "max tail ratio " + fmt("%.3g", r.suite->max_tail_ratio) + ", ";
  }
  return {ok, detail + fmt("%.0f", s) + " s"};
}

Outcome determinism(Context &ctx) {
  SimConfig c;
  c.name = "determinism";
  c.d = 5;
  c.mu = 0.5;
  c.n_r = c.n_z = 48;
  c.r_max = c.z_max = 12.0;
  c.ic = "random";
  c.ic_amplitude = 1.5;
  c.seed = 77;
  c.dt0 = 1e-3;
  c.dt_max = 5e-3;
  c.t_end = 0.5;
  c.snapshot_every = 4;
  c.check_every = 2;
  c.virial_C = 1.0;

  c.output_dir = (ctx.out / "determinism-a").string();
  const RunOutcome a = run_scenario(c);
  c.output_dir = (ctx.out / "determinism-b").string();
  run_scenario(c);
  const bool same = slurp(ctx.out / "determinism-a" / "trajectory.csv") ==
                    slurp(ctx.out / "determinism-b" / "trajectory.csv");
  c.seed = 78;
  c.output_dir = (ctx.out / "determinism-c").string();
  run_scenario(c);
  const bool differs = slurp(ctx.out / "determinism-a" / "trajectory.csv") !=
                       slurp(ctx.out / "determinism-c" / "trajectory.csv");

  SimConfig first = c;
  first.seed = 77;
  first.output_dir = (ctx.out / "determinism-resume").string();
  first.max_steps = a.state.step_count / 2 - (a.state.step_count / 2) % c.snapshot_every;
  const RunOutcome half = run_scenario(first);
  SimConfig rest = first;
  rest.max_steps = 0;
  const RunOutcome resumed =
      resume_scenario(rest, fs::path(first.output_dir) / "checkpoint.bin");
  const Real rel = (resumed.state.field.values - a.state.field.values).norm() /
                   a.state.field.values.norm();
  const bool ok = same && differs && half.state.t < c.t_end &&
                  resumed.state.step_count == a.state.step_count && rel <= 1e-10;
  return {ok, std::string("identical seeds ") + (same ? "byte-identical" : "DIFFER") +
                  ", other seed " + (differs ? "differs" : "identical") + ", resume from t=" +
                  fmt("%.4f", half.state.t) + " differs by " + fmt("%.2e", rel)};
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance checks"};
  std::string out = "acceptance_out";
  std::vector<int> only;
  app.add_option("--out", out, "directory for scenario outputs")->capture_default_str();
  app.add_option("--only", only, "criterion numbers to run (default: all)");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.out = out;
  fs::create_directories(ctx.out);

  const std::vector<std::pair<std::string, std::function<Outcome(Context &)>>> criteria = {
      {"cutoff certificate", cutoff_certificate},
      {"operator oracles", operator_oracles},
      {"conservation", conservation},
      {"splitting order", splitting_order},
      {"mass-critical blowup (mc-neg-energy)", mass_critical_blowup},
      {"virial rate inequality", virial_inequality},
      {"mass-critical core bound", mass_critical_core},
      {"ground state", ground_state},
      {"inequality suite", inequality_suite},
      {"determinism and checkpointing", determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception &e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
