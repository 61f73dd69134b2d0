#include "cloak/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>

#include "cloak/oracles.hpp"
#include "cloak/specfun.hpp"

namespace cloak::harness {
namespace {

using scattering::IncidentField;
using scattering::SolveOptions;

double observe(const scattering::FarField& far, Observable obs) {
  return obs == Observable::sup_norm ? far.sup_norm : far.l2_norm;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Radiation of the bare source: core material and source on D_{1/2}, nothing else.
double source_reference_norm(const CloakSpec& spec, Observable obs, const SolveOptions& options) {
  materials::Layer core{0.0, materials::kCoreRadius,
                        {spec.core.sigma_r, spec.core.sigma_t, spec.core.q},
                        RadialFn(*spec.source)};
  materials::LayeredMedium medium(spec.dimension, {core});
  auto sol = scattering::solve(medium, IncidentField::none(spec.omega), options);
  return observe(sol.far, obs);
}

bool source_is_zero(const CloakSpec& spec) {
  if (!spec.source) return true;
  for (int j = 0; j < materials::kValidationSamples; ++j) {
    const double r = materials::kCoreRadius * j / (materials::kValidationSamples - 1);
    if ((*spec.source)(r) != cplx(0.0)) return false;
  }
  return true;
}

SweepResult sweep_impl(const SweepPlan& plan, bool active, int workers) {
  plan.validate();
  const auto& grid = plan.epsilon_grid;
  SweepResult result;
  result.records.resize(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    CloakSpec spec = plan.base;
    spec.epsilon = grid[i];
    try {
      result.records[i] = solve_point(spec, plan.form, plan.plane_wave, plan.observable, plan.solve);
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep failed at epsilon = " + std::to_string(grid[i]) + ": " +
                               e.what());
    }
  });
  std::vector<double> eps;
  std::vector<double> norms;
  for (const auto& r : result.records) {
    eps.push_back(r.epsilon);
    norms.push_back(r.norm);
  }
  const double p = theoretical_exponent(plan.base.dimension, plan.base.r_exponent, active);
  result.fit = fit_rate(eps, norms, p);
  result.reference_norm = active ? source_reference_norm(plan.base, plan.observable, plan.solve)
                                 : reference_norm(plan.base.dimension, plan.base.omega,
                                                  plan.observable);
  result.reference_check = result.records.back().norm < 1e-2 * result.reference_norm;
  result.pass = result.fit.pass && result.reference_check;
  return result;
}

}  // namespace

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  std::vector<std::exception_ptr> errors(count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count || failed.load()) return;
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed.store(true);
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double theoretical_exponent(int dimension, double r, bool active) {
  if (dimension != 2 && dimension != 3) throw std::invalid_argument("dimension must be 2 or 3");
  const double n = dimension;
  if (!(r > materials::min_r_exponent(dimension))) {
    throw std::invalid_argument("r must exceed 2 - N/2 = " +
                                std::to_string(materials::min_r_exponent(dimension)));
  }
  if (active) return std::min(n / 2.0, n / 2.0 + r - 2.0);
  return std::min(n + 2.0 * r - 4.0, n);
}

RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y, double exponent,
                 double slack) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("rate fit needs at least two matching points");
  }
  auto fit = [](const std::vector<double>& lx, const std::vector<double>& ly) {
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("rate fit needs distinct abscissae");
    const double slope = sxy / sxx;
    return std::pair<double, double>{slope, my - slope * mx};
  };
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw std::invalid_argument("rate fit needs positive finite data");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  RateFit out;
  std::tie(out.slope, out.intercept) = fit(lx, ly);
  for (std::size_t i = 0; i < lx.size(); ++i) {
    out.residual = std::max(out.residual, std::abs(ly[i] - out.intercept - out.slope * lx[i]));
  }
  out.theoretical_exponent = exponent;
  out.slack = slack;
  out.pass = out.slope >= exponent - slack;
  if (lx.size() >= 3) {
    const std::size_t largest =
        static_cast<std::size_t>(std::max_element(lx.begin(), lx.end()) - lx.begin());
    std::vector<double> lx2, ly2;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      if (i == largest) continue;
      lx2.push_back(lx[i]);
      ly2.push_back(ly[i]);
    }
    out.slope_without_largest = fit(lx2, ly2).first;
  } else {
    out.slope_without_largest = out.slope;
  }
  return out;
}

void SweepPlan::validate() const {
  if (epsilon_grid.empty()) throw std::invalid_argument("epsilon grid is empty");
  for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
    const double e = epsilon_grid[i];
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("epsilon grid values must lie in (0, 1)");
    if (i > 0 && !(e < epsilon_grid[i - 1])) {
      throw std::invalid_argument("epsilon grid must be strictly decreasing");
    }
  }
}

double reference_norm(int dimension, double omega, Observable observable) {
  materials::Layer ball{0.0, 1.0,
                        materials::AnisotropicProfile::isotropic(RadialFn::constant(1.0),
                                                                 RadialFn::constant(5.0)),
                        std::nullopt};
  auto sol = scattering::solve(materials::LayeredMedium(dimension, {ball}),
                               IncidentField::plane_wave(omega));
  return observe(sol.far, observable);
}

SweepRecord solve_point(const CloakSpec& spec, ProblemForm form, bool plane_wave,
                        Observable observable, const SolveOptions& options) {
  const auto medium = form == ProblemForm::virtual_form ? materials::assemble_virtual(spec)
                                                        : materials::assemble_physical(spec);
  SolveOptions opts = options;
  opts.keep_interior = true;
  const IncidentField field =
      plane_wave ? IncidentField::plane_wave(spec.omega) : IncidentField::none(spec.omega);
  const auto sol = scattering::solve(medium, field, opts);
  const auto energy = scattering::energy_report(sol, spec.omega);
  SweepRecord rec;
  rec.epsilon = spec.epsilon;
  rec.sup_norm = sol.far.sup_norm;
  rec.l2_norm = sol.far.l2_norm;
  rec.norm = observe(sol.far, observable);
  rec.absorbed = energy.absorbed_volume;
  rec.energy_residual = energy.residual;
  rec.k_max = sol.k_max;
  rec.rk_steps = sol.rk_steps;
  return rec;
}

SweepResult run_sweep(const SweepPlan& plan, int workers) {
  const bool active = !source_is_zero(plan.base);
  return sweep_impl(plan, active, workers);
}

SweepResult run_source_sweep(const SweepPlan& plan, int workers) {
  if (source_is_zero(plan.base)) {
    SweepPlan passive = plan;
    passive.base.source.reset();
    passive.plane_wave = true;
    return sweep_impl(passive, false, workers);
  }
  return sweep_impl(plan, true, workers);
}

double equivalence_check(const CloakSpec& spec, const SolveOptions& options, bool plane_wave) {
  const IncidentField field =
      plane_wave ? IncidentField::plane_wave(spec.omega) : IncidentField::none(spec.omega);
  const auto phys = scattering::solve(materials::assemble_physical(spec), field, options);
  const auto virt = scattering::solve(materials::assemble_virtual(spec), field, options);
  double diff = 0.0;
  for (std::size_t j = 0; j < virt.far.values.size(); ++j) {
    diff = std::max(diff, std::abs(phys.far.values[j] - virt.far.values[j]));
  }
  return diff / std::max(virt.far.sup_norm, 1e-300);
}

SoundHardResult sound_hard_rate(int dimension, const std::vector<double>& tau_grid, double omega) {
  if (tau_grid.size() < 2) throw std::invalid_argument("sound-hard rate needs at least two radii");
  SoundHardResult out;
  const auto grid = scattering::DirectionGrid::make(dimension, 720);
  const IncidentField field = IncidentField::plane_wave(omega);
  for (double tau : tau_grid) {
    if (!(tau > 0.0)) throw std::invalid_argument("obstacle radius must be positive");
    std::vector<scattering::ModeSolution> modes;
    double max_size = 0.0;
    std::vector<double> sizes;
    for (int k = 0; k <= specfun::kMaxOrder; ++k) {
      const auto mode = radial::ModeIndex::make(dimension, k);
      const std::vector<int> orders =
          (dimension == 2 && k > 0) ? std::vector<int>{k, -k} : std::vector<int>{k};
      double size = 0.0;
      for (int n : orders) {
        const cplx b = scattering::incident_coeffs(field, mode, n);
        const cplx a = oracles::neumann_coefficient(dimension, k, omega, tau, b);
        modes.push_back({mode, n, b, a, 0.0});
        size = std::max(size, std::abs(a));
      }
      sizes.push_back(size);
      max_size = std::max(max_size, size);
      if (k >= 2 && sizes[k] <= 1e-12 * max_size && sizes[k - 1] <= 1e-12 * max_size &&
          sizes[k - 2] <= 1e-12 * max_size) {
        break;
      }
    }
    const auto far = scattering::far_field(dimension, omega, modes, grid);
    out.tau.push_back(tau);
    out.sup_norm.push_back(far.sup_norm);
  }
  out.fit = fit_rate(out.tau, out.sup_norm, static_cast<double>(dimension));
  return out;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("scan grid is empty");
  if (!(lo > 0.0 && hi >= lo)) throw std::invalid_argument("log grid needs 0 < lo <= hi");
  std::vector<double> g(count);
  for (int j = 0; j < count; ++j) {
    g[j] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(j) / (count - 1));
  }
  return g;
}

double rate_budget(const SweepResult& sweep, double epsilon) {
  const double p = sweep.fit.theoretical_exponent;
  double c = 0.0;
  for (const auto& r : sweep.records) c = std::max(c, r.norm / std::pow(r.epsilon, p));
  return c * std::pow(epsilon, p);
}

BusterScan buster_scan_passive(const CloakSpec& base, const std::vector<double>& q_grid,
                               const SolveOptions& options, std::optional<double> budget,
                               int workers) {
  if (q_grid.empty()) throw std::invalid_argument("buster scan grid is empty");
  BusterScan scan;
  scan.epsilon = base.epsilon;
  scan.lossy = base.lossy_enabled;
  scan.budget = budget;
  scan.points.resize(q_grid.size());
  parallel_for(q_grid.size(), workers, [&](std::size_t i) {
    CloakSpec spec = base;
    spec.core.sigma_r = spec.core.sigma_t = CoefficientFn::constant(1.0);
    spec.core.q = CoefficientFn::constant(q_grid[i]);
    BusterPoint pt;
    pt.q_a = q_grid[i];
    try {
      const auto sol = scattering::solve(materials::assemble_virtual(spec),
                                         IncidentField::plane_wave(spec.omega), options);
      pt.sup_norm = sol.far.sup_norm;
    } catch (const scattering::DegenerateMatch&) {
      pt.degenerate = true;
      pt.sup_norm = std::numeric_limits<double>::infinity();
    }
    scan.points[i] = pt;
  });
  std::vector<double> values;
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    values.push_back(scan.points[i].sup_norm);
    if (scan.points[i].sup_norm > scan.points[scan.peak_index].sup_norm) scan.peak_index = i;
  }
  scan.peak = scan.points[scan.peak_index].sup_norm;
  scan.median = median_of(values);
  scan.peak_to_median = scan.median > 0.0 ? scan.peak / scan.median
                                          : std::numeric_limits<double>::infinity();
  scan.reference_norm = reference_norm(base.dimension, base.omega, Observable::sup_norm);
  if (scan.lossy) {
    scan.pass = scan.peak_to_median <= 2.0 && (!budget || scan.peak <= *budget);
  } else {
    scan.pass = scan.peak >= 0.1 * scan.reference_norm && scan.peak_to_median >= 10.0;
  }
  return scan;
}

ActiveDemo buster_demo_active(const std::vector<double>& epsilon_grid, double c0, double omega,
                              const SolveOptions& options, int workers) {
  SweepPlan probe;
  probe.epsilon_grid = epsilon_grid;
  probe.validate();
  ActiveDemo demo;
  demo.records.resize(epsilon_grid.size());
  parallel_for(epsilon_grid.size(), workers, [&](std::size_t i) {
    const double eps = epsilon_grid[i];
    CloakSpec spec;
    spec.dimension = 2;
    spec.epsilon = eps;
    spec.omega = omega;
    spec.lossy_enabled = false;
    spec.core.sigma_r = spec.core.sigma_t = CoefficientFn::constant(1.0);
    spec.core.q = CoefficientFn::constant(eps * eps);
    spec.source = CoefficientFn::constant(c0);
    spec.allow_buster = true;
    demo.records[i] = solve_point(spec, ProblemForm::virtual_form, false, Observable::sup_norm,
                                  options);
  });
  std::vector<double> eps, norms;
  bool all_positive = true;
  for (const auto& r : demo.records) {
    eps.push_back(r.epsilon);
    norms.push_back(r.norm);
    if (!(r.norm > 0.0)) all_positive = false;
  }
  if (all_positive) {
    demo.fit = fit_rate(eps, norms, 0.0);
    demo.non_decaying = demo.fit->slope <= kNonDecayingSlope;
  }

  if (c0 != 0.0) {
    SweepPlan cloaked;
    cloaked.base.dimension = 2;
    cloaked.base.omega = omega;
    cloaked.base.r_exponent = 2.0;
    cloaked.base.core.q = CoefficientFn::constant(cplx(1.0, 1.0));
    cloaked.base.core.sigma_r = cloaked.base.core.sigma_t = CoefficientFn::constant(1.0);
    cloaked.base.source = CoefficientFn::constant(c0);
    cloaked.epsilon_grid = epsilon_grid;
    cloaked.plane_wave = false;
    cloaked.solve = options;
    demo.cloaked = run_source_sweep(cloaked, workers);
  }
  demo.pass = demo.non_decaying && demo.cloaked && demo.cloaked->fit.pass;
  return demo;
}

}  // namespace cloak::harness
