#include "cloak/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <system_error>

#include "cloak/validation.hpp"

namespace cloak::report {
namespace {

using config::Command;
using config::json;
using config::RunConfig;
using harness::SweepResult;

constexpr double kEnergyTol = 1e-6;
constexpr double kEquivalenceTol = 1e-6;
constexpr double kTransformTol = 1e-7;
constexpr double kFitResidualTol = 0.35;
constexpr double kUniformitySpread = 0.3;
constexpr double kResonanceVsReference = 0.1;
constexpr double kResonanceVsMedian = 10.0;
constexpr double kDampedVsMedian = 2.0;
constexpr int kTransformTrials = 5;
constexpr std::uint64_t kTransformSeed = 20240611;

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json fit_json(const harness::RateFit& f) {
  return {{"slope", num(f.slope)},
          {"intercept", num(f.intercept)},
          {"residual", num(f.residual)},
          {"theoretical_exponent", num(f.theoretical_exponent)},
          {"slack", num(f.slack)},
          {"slope_without_largest", num(f.slope_without_largest)},
          {"pass", f.pass}};
}

json sweep_json(const SweepResult& s) {
  json records = json::array();
  for (const auto& r : s.records) {
    records.push_back({{"epsilon", num(r.epsilon)},
                       {"norm", num(r.norm)},
                       {"sup_norm", num(r.sup_norm)},
                       {"l2_norm", num(r.l2_norm)},
                       {"absorbed", num(r.absorbed)},
                       {"energy_residual", num(r.energy_residual)},
                       {"k_max", r.k_max},
                       {"rk_steps", r.rk_steps}});
  }
  return {{"records", records},
          {"fit", fit_json(s.fit)},
          {"reference_norm", num(s.reference_norm)},
          {"reference_check", s.reference_check},
          {"pass", s.pass}};
}

json scan_json(const harness::BusterScan& s) {
  return {{"epsilon", num(s.epsilon)},
          {"lossy", s.lossy},
          {"points", s.points.size()},
          {"peak_q_a", num(s.points[s.peak_index].q_a)},
          {"peak", num(s.peak)},
          {"median", num(s.median)},
          {"peak_to_median", num(s.peak_to_median)},
          {"reference_norm", num(s.reference_norm)},
          {"budget", s.budget ? num(*s.budget) : json(nullptr)},
          {"degenerate_points",
           std::count_if(s.points.begin(), s.points.end(),
                         [](const harness::BusterPoint& p) { return p.degenerate; })},
          {"pass", s.pass}};
}

std::string scan_csv(const harness::BusterScan& s) {
  std::string out = "q_a,sup_norm,degenerate\n";
  for (const auto& p : s.points) {
    out += format_double(p.q_a) + "," + format_double(p.sup_norm) + "," +
           (p.degenerate ? "1" : "0") + "\n";
  }
  return out;
}

// Accumulates checks and deterministic work counters.
struct Context {
  json checks = json::array();
  std::int64_t solves = 0;
  std::int64_t rk_steps = 0;

  void check(const std::string& name, double value, const char* relation, double limit) {
    const std::string rel(relation);
    const bool pass = rel == "<=" ? value <= limit : rel == "<" ? value < limit : value >= limit;
    checks.push_back({{"name", name},
                      {"value", num(value)},
                      {"relation", relation},
                      {"limit", num(limit)},
                      {"pass", pass}});
  }
  void flag(const std::string& name, bool pass) {
    checks.push_back({{"name", name}, {"pass", pass}});
  }
  void count(const SweepResult& s) {
    solves += static_cast<std::int64_t>(s.records.size());
    for (const auto& r : s.records) rk_steps += r.rk_steps;
  }
  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c["pass"].get<bool>()) return false;
    }
    return true;
  }
};

harness::SweepPlan make_plan(const RunConfig& cfg) {
  harness::SweepPlan plan;
  plan.base = cfg.spec;
  plan.epsilon_grid = cfg.sweep.epsilon_grid;
  plan.observable = cfg.sweep.observable;
  plan.form = cfg.sweep.form;
  plan.solve = config::solve_options(cfg);
  plan.plane_wave = cfg.incident.plane_wave;
  return plan;
}

void sweep_checks(Context& ctx, const std::string& prefix, const SweepResult& s) {
  ctx.check(prefix + "slope", s.fit.slope, ">=", s.fit.theoretical_exponent - s.fit.slack);
  ctx.check(prefix + "reference", s.records.back().norm, "<=", 1e-2 * s.reference_norm);
  double worst = 0.0;
  for (const auto& r : s.records) worst = std::max(worst, r.energy_residual);
  ctx.check(prefix + "energy_residual", worst, "<=", kEnergyTol);
}

json run_solve(const RunConfig& cfg, Context& ctx, Outcome& out) {
  const auto medium = config::explicit_medium(cfg).value_or(
      cfg.solve_form == harness::ProblemForm::virtual_form ? materials::assemble_virtual(cfg.spec)
                                                           : materials::assemble_physical(cfg.spec));
  scattering::IncidentField field =
      cfg.incident.plane_wave
          ? scattering::IncidentField::plane_wave(cfg.spec.omega, cfg.incident.angle)
          : scattering::IncidentField::none(cfg.spec.omega);
  if (cfg.incident.plane_wave) field.amplitude = cfg.incident.amplitude;
  auto opts = config::solve_options(cfg);
  opts.keep_interior = true;
  const auto sol = scattering::solve(medium, field, opts);
  const auto energy = scattering::energy_report(sol, cfg.spec.omega);
  ctx.solves += 1;
  ctx.rk_steps += sol.rk_steps;
  ctx.check("energy_residual", energy.residual, "<=", kEnergyTol);
  out.files.emplace_back("farfield.csv", farfield_csv(sol.far));
  out.files.emplace_back("modes.csv", modes_csv(sol.modes));
  return {{"r_match", num(sol.r_match)},
          {"k_max", sol.k_max},
          {"sup_norm", num(sol.far.sup_norm)},
          {"l2_norm", num(sol.far.l2_norm)},
          {"energy",
           {{"absorbed_volume", num(energy.absorbed_volume)},
            {"boundary_flux", num(energy.boundary_flux)},
            {"source_work", num(energy.source_work)},
            {"residual", num(energy.residual)}}},
          {"unitarity_defect", num(scattering::unitarity_defect(sol.modes))}};
}

json run_sweep_command(const RunConfig& cfg, bool source, int workers, Context& ctx, Outcome& out) {
  const auto plan = make_plan(cfg);
  const SweepResult base =
      source ? harness::run_source_sweep(plan, workers) : harness::run_sweep(plan, workers);
  ctx.count(base);
  sweep_checks(ctx, "", base);
  const bool passive = !cfg.spec.source;
  if (passive) ctx.check("fit_residual", base.fit.residual, "<=", kFitResidualTol);
  out.files.emplace_back("sweep.csv", plot_table(base));
  json results = {{"sweep", sweep_json(base)}};
  if (!cfg.sweep.materials.empty()) {
    json variants = json::array();
    double lo = base.fit.slope;
    double hi = base.fit.slope;
    for (std::size_t i = 0; i < cfg.sweep.materials.size(); ++i) {
      auto p = plan;
      p.base.core = cfg.sweep.materials[i];
      const SweepResult s =
          source ? harness::run_source_sweep(p, workers) : harness::run_sweep(p, workers);
      ctx.count(s);
      const std::string prefix = "material_" + std::to_string(i) + "_";
      sweep_checks(ctx, prefix, s);
      if (passive) ctx.check(prefix + "fit_residual", s.fit.residual, "<=", kFitResidualTol);
      out.files.emplace_back("sweep_" + prefix.substr(0, prefix.size() - 1) + ".csv",
                             plot_table(s));
      variants.push_back(sweep_json(s));
      lo = std::min(lo, s.fit.slope);
      hi = std::max(hi, s.fit.slope);
    }
    ctx.check("uniformity_spread", hi - lo, "<", kUniformitySpread);
    results["materials"] = variants;
    results["slope_spread"] = num(hi - lo);
  }
  return results;
}

json run_equivalence(const RunConfig& cfg, Context& ctx) {
  const double d =
      harness::equivalence_check(cfg.spec, config::solve_options(cfg), cfg.incident.plane_wave);
  ctx.solves += 2;
  ctx.check("equivalence", d, "<=", kEquivalenceTol);
  return {{"discrepancy", num(d)}, {"rel_tol", num(cfg.solver.rel_tol)}};
}

json run_buster_passive(const RunConfig& cfg, int workers, Context& ctx, Outcome& out) {
  const auto opts = config::solve_options(cfg);
  const auto grid = harness::log_grid(cfg.buster.q_min, cfg.buster.q_max, cfg.buster.points);

  auto budget_plan = make_plan(cfg);
  budget_plan.base.lossy_enabled = true;
  budget_plan.plane_wave = true;
  budget_plan.observable = harness::Observable::sup_norm;
  const SweepResult budget_sweep = harness::run_sweep(budget_plan, workers);
  ctx.count(budget_sweep);
  const double budget = harness::rate_budget(budget_sweep, cfg.spec.epsilon);

  auto bare = cfg.spec;
  bare.lossy_enabled = false;
  const auto open = harness::buster_scan_passive(bare, grid, opts, std::nullopt, workers);
  auto damped_spec = cfg.spec;
  damped_spec.lossy_enabled = true;
  const auto damped = harness::buster_scan_passive(damped_spec, grid, opts, budget, workers);
  ctx.solves += static_cast<std::int64_t>(2 * grid.size());

  ctx.check("resonance_peak_vs_reference", open.peak, ">=",
            kResonanceVsReference * open.reference_norm);
  ctx.check("resonance_peak_to_median", open.peak_to_median, ">=", kResonanceVsMedian);
  ctx.check("damped_peak_to_median", damped.peak_to_median, "<=", kDampedVsMedian);
  ctx.check("damped_peak_vs_budget", damped.peak, "<=", budget);
  out.files.emplace_back("buster_no_lossy.csv", scan_csv(open));
  out.files.emplace_back("buster_lossy.csv", scan_csv(damped));
  return {{"no_lossy", scan_json(open)},
          {"lossy", scan_json(damped)},
          {"budget_sweep", sweep_json(budget_sweep)},
          {"budget", num(budget)}};
}

json run_buster_active(const RunConfig& cfg, int workers, Context& ctx, Outcome& out) {
  const auto demo = harness::buster_demo_active(cfg.buster.epsilon_grid, cfg.buster.c0,
                                                cfg.spec.omega, config::solve_options(cfg), workers);
  ctx.solves += static_cast<std::int64_t>(demo.records.size());
  json records = json::array();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& r : demo.records) {
    ctx.rk_steps += r.rk_steps;
    records.push_back({{"epsilon", num(r.epsilon)},
                       {"sup_norm", num(r.sup_norm)},
                       {"energy_residual", num(r.energy_residual)}});
    lo = std::min(lo, r.sup_norm);
    hi = std::max(hi, r.sup_norm);
  }
  json results = {{"records", records},
                  {"band_ratio", num(lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity())}};
  if (demo.fit) {
    results["fit"] = fit_json(*demo.fit);
    ctx.check("uncloaked_slope", demo.fit->slope, "<=", harness::kNonDecayingSlope);
    std::vector<double> eps, norms;
    for (const auto& r : demo.records) {
      eps.push_back(r.epsilon);
      norms.push_back(r.sup_norm);
    }
    out.files.emplace_back("buster_active.csv", plot_table(eps, norms, *demo.fit));
  } else {
    ctx.flag("uncloaked_nonzero", false);
  }
  if (demo.cloaked) {
    ctx.count(*demo.cloaked);
    ctx.check("cloaked_slope", demo.cloaked->fit.slope, ">=",
              demo.cloaked->fit.theoretical_exponent - demo.cloaked->fit.slack);
    results["cloaked"] = sweep_json(*demo.cloaked);
    out.files.emplace_back("buster_active_cloaked.csv", plot_table(*demo.cloaked));
  }
  return results;
}

json run_sound_hard(const RunConfig& cfg, Context& ctx, Outcome& out) {
  const auto r = harness::sound_hard_rate(cfg.spec.dimension, cfg.sound_hard.tau_grid, cfg.spec.omega);
  ctx.check("slope", r.fit.slope, ">=", r.fit.theoretical_exponent - r.fit.slack);
  json rows = json::array();
  for (std::size_t i = 0; i < r.tau.size(); ++i) {
    rows.push_back({{"tau", num(r.tau[i])}, {"sup_norm", num(r.sup_norm[i])}});
  }
  out.files.emplace_back("sound_hard.csv", plot_table(r.tau, r.sup_norm, r.fit, "log10_tau"));
  return {{"records", rows}, {"fit", fit_json(r.fit)}};
}

json run_oracle(const RunConfig& cfg, Context& ctx) {
  const auto opts = config::solve_options(cfg);
  json rows = json::array();
  for (const auto& c : validation::oracle_suite(opts)) {
    ctx.check(c.name, c.value, "<=", c.tolerance);
    rows.push_back({{"name", c.name}, {"residual", num(c.value)}});
  }
  for (int n : {2, 3}) {
    const double d = validation::transformation_defect(n, kTransformTrials, kTransformSeed, opts);
    const std::string name = "transformation_" + std::to_string(n) + "d";
    ctx.check(name, d, "<=", kTransformTol);
    rows.push_back({{"name", name}, {"residual", num(d)}});
  }
  return {{"residuals", rows}};
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename into " + path.string());
  }
}

std::string plot_table(const std::vector<double>& x, const std::vector<double>& y,
                       const harness::RateFit& fit, const std::string& x_name) {
  std::string out = x_name + ",log10_norm,fit_line\n";
  const double intercept10 = fit.intercept / std::numbers::ln10;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    const double lx = std::log10(x[i]);
    out += format_double(lx) + "," + format_double(std::log10(y[i])) + "," +
           format_double(intercept10 + fit.slope * lx) + "\n";
  }
  return out;
}

std::string plot_table(const SweepResult& sweep) {
  std::vector<double> x, y;
  for (const auto& r : sweep.records) {
    x.push_back(r.epsilon);
    y.push_back(r.norm);
  }
  return plot_table(x, y, sweep.fit);
}

void emit_plot_table(const SweepResult& sweep, const std::filesystem::path& path) {
  write_atomic(path, plot_table(sweep));
}

std::string farfield_csv(const scattering::FarField& far) {
  std::string out = "theta_or_costheta,re_A,im_A,abs_A\n";
  for (std::size_t j = 0; j < far.values.size(); ++j) {
    const double t = far.dimension == 2 ? far.angles[j] : std::cos(far.angles[j]);
    const cplx a = far.values[j];
    out += format_double(t) + "," + format_double(a.real()) + "," + format_double(a.imag()) + "," +
           format_double(std::abs(a)) + "\n";
  }
  return out;
}

std::string modes_csv(const std::vector<scattering::ModeSolution>& modes) {
  std::string out = "k,re_a,im_a,abs_a\n";
  for (const auto& m : modes) {
    out += std::to_string(m.n) + "," + format_double(m.a.real()) + "," + format_double(m.a.imag()) +
           "," + format_double(std::abs(m.a)) + "\n";
  }
  return out;
}

Outcome execute(const RunConfig& cfg, int workers) {
  Outcome out;
  Context ctx;
  json results = json::object();
  try {
    switch (cfg.command) {
      case Command::solve: results = run_solve(cfg, ctx, out); break;
      case Command::sweep: results = run_sweep_command(cfg, false, workers, ctx, out); break;
      case Command::source_sweep: results = run_sweep_command(cfg, true, workers, ctx, out); break;
      case Command::equivalence: results = run_equivalence(cfg, ctx); break;
      case Command::buster_passive: results = run_buster_passive(cfg, workers, ctx, out); break;
      case Command::buster_active: results = run_buster_active(cfg, workers, ctx, out); break;
      case Command::sound_hard: results = run_sound_hard(cfg, ctx, out); break;
      case Command::oracle: results = run_oracle(cfg, ctx); break;
    }
    out.exit_code = ctx.all_pass() ? kPass : kChecksFailed;
  } catch (const std::exception& e) {
    out.files.clear();
    results = json::object();
    results["error"] = {{"kind", "solver"}, {"message", e.what()}};
    ctx.flag("completed", false);
    out.exit_code = kSolverError;
  }
  out.summary = {{"command", config::to_string(cfg.command)},
                 {"config", config::to_json(cfg)},
                 {"results", results},
                 {"checks", ctx.checks},
                 {"timing", {{"solves", ctx.solves}, {"rk_steps", ctx.rk_steps}}},
                 {"version", kVersion}};
  return out;
}

Outcome run(const RunConfig& cfg, const std::filesystem::path& out_dir, int workers) {
  Outcome out = execute(cfg, workers);
  std::filesystem::create_directories(out_dir);
  if (cfg.output.csv) {
    for (const auto& [name, content] : out.files) write_atomic(out_dir / name, content);
  }
  if (cfg.output.json) write_atomic(out_dir / "summary.json", out.summary.dump(2) + "\n");
  return out;
}

}  // namespace cloak::report
