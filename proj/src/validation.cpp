#include "cloak/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "cloak/oracles.hpp"
#include "cloak/specfun.hpp"

namespace cloak::validation {
namespace {

using materials::AnisotropicProfile;
using materials::Layer;
using materials::LayeredMedium;
using scattering::IncidentField;

Layer constant_layer(double r0, double r1, cplx sigma, cplx q) {
  return {r0, r1, AnisotropicProfile::isotropic(RadialFn::constant(sigma), RadialFn::constant(q)),
          std::nullopt};
}

double far_discrepancy(const scattering::FarField& got, const scattering::FarField& want) {
  double diff = 0.0;
  for (std::size_t j = 0; j < want.values.size(); ++j) {
    diff = std::max(diff, std::abs(got.values[j] - want.values[j]));
  }
  return diff / std::max(want.sup_norm, 1e-300);
}

}  // namespace

double wronskian_defect(int dimension) {
  static const double xs[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0};
  double worst = 0.0;
  for (int n = 0; n <= 20; ++n) {
    for (double x : xs) {
      double w, expected;
      if (dimension == 2) {
        w = specfun::bessel_j(n, x) * specfun::bessel_y_prime(n, x) -
            specfun::bessel_j_prime(n, x) * specfun::bessel_y(n, x);
        expected = 2.0 / (std::numbers::pi * x);
      } else {
        w = specfun::spherical_j(n, x) * specfun::spherical_y_prime(n, x) -
            specfun::spherical_j_prime(n, x) * specfun::spherical_y(n, x);
        expected = 1.0 / (x * x);
      }
      worst = std::max(worst, std::abs(w - expected) / expected);
    }
  }
  return worst;
}

double mie_discrepancy(int dimension, double omega, double radius, double sigma, double q,
                       const scattering::SolveOptions& options) {
  LayeredMedium ball(dimension, {constant_layer(0.0, radius, sigma, q)});
  const auto sol = scattering::solve(ball, IncidentField::plane_wave(omega), options);
  auto exact = sol.modes;
  for (auto& m : exact) {
    m.a = oracles::mie_coefficient(dimension, m.mode.k, omega, radius, sigma, q, m.b);
  }
  const auto grid = scattering::DirectionGrid::make(dimension, options.far_grid);
  return far_discrepancy(sol.far, scattering::far_field(dimension, omega, exact, grid));
}

double layered_discrepancy(int dimension, double omega, const scattering::SolveOptions& options) {
  const cplx s0(1.0, 0.2), q0(5.0, 1.0), f0(1.0, 0.5);
  const cplx s1(0.3, 0.1), q1(2.0, 3.0);
  const cplx s2(2.0, 0.0), q2(0.5, 0.01);
  Layer core = constant_layer(0.0, 0.5, s0, q0);
  core.source = RadialFn::constant(f0);
  LayeredMedium medium(dimension,
                       {core, constant_layer(0.5, 1.0, s1, q1), constant_layer(1.0, 1.5, s2, q2)});
  const std::vector<oracles::ConstantLayer> layers{{0.5, s0, q0, f0}, {1.0, s1, q1, 0.0},
                                                   {1.5, s2, q2, 0.0}};
  const auto sol = scattering::solve(medium, IncidentField::plane_wave(omega), options);
  const double radius = 1.5;
  const double c = std::pow(radius, dimension - 1) * omega;
  double worst = 0.0;
  double scale = 0.0;
  for (const auto& m : sol.modes) {
    if (m.n != m.mode.k || m.mode.k > 10) continue;
    const auto t = oracles::transfer_matrix(dimension, m.mode.k, omega, layers);
    const auto ex = scattering::exterior_basis(m.mode, omega * radius);
    const cplx up = t.has_particular ? t.u_p : 0.0;
    const cplx wp = t.has_particular ? t.w_p : 0.0;
    // kappa u + u_p = b J + a H and kappa w + w_p = c (b J' + a H'), kappa eliminated.
    const cplx a = (c * m.b * ex.jp * t.u - wp * t.u - m.b * ex.j * t.w + up * t.w) /
                   (ex.h * t.w - c * ex.hp * t.u);
    worst = std::max(worst, std::abs(m.a - a));
    scale = std::max(scale, std::abs(a));
  }
  return worst / std::max(scale, 1e-300);
}

materials::PiecewiseRadialMap random_radial_map(double r_ext, int pieces, std::uint64_t seed) {
  if (pieces < 1) throw std::invalid_argument("a radial map needs at least one piece");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Breakpoints drawn as normalized positive increments keep every piece wider
  // than r_ext / (4 pieces).
  auto partition = [&] {
    std::vector<double> w(pieces);
    double total = 0.0;
    for (auto& x : w) total += (x = 0.25 + unit(rng));
    std::vector<double> t{0.0};
    double acc = 0.0;
    for (int i = 0; i < pieces - 1; ++i) t.push_back(r_ext * ((acc += w[i]) / total));
    t.push_back(r_ext);
    return t;
  };
  const auto t = partition();
  const auto s = partition();
  std::vector<materials::RadialMap> maps;
  for (int i = 0; i < pieces; ++i) {
    maps.push_back(materials::RadialMap::between(t[i], t[i + 1], s[i], s[i + 1]));
  }
  return materials::PiecewiseRadialMap(std::move(maps));
}

double transformation_defect(int dimension, int trials, std::uint64_t seed,
                             const scattering::SolveOptions& options) {
  LayeredMedium base(dimension, {constant_layer(0.0, 0.5, 1.0, 5.0),
                                 constant_layer(0.5, 1.0, cplx(2.0, 0.5), cplx(1.0, 1.0)),
                                 constant_layer(1.0, 2.0, 1.0, 1.0)});
  const IncidentField field = IncidentField::plane_wave(1.0);
  const double reference = scattering::solve(base, field, options).far.sup_norm;
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const auto map = random_radial_map(base.r_ext(), 3, seed + static_cast<std::uint64_t>(i));
    const auto pushed = materials::push_forward_medium(map, base);
    const double norm = scattering::solve(pushed, field, options).far.sup_norm;
    worst = std::max(worst, std::abs(norm - reference) / reference);
  }
  return worst;
}

double lossless_unitarity(int dimension, const scattering::SolveOptions& options) {
  LayeredMedium medium(dimension,
                       {constant_layer(0.0, 0.5, 1.0, 5.0), constant_layer(0.5, 1.0, 2.0, 0.5)});
  const auto sol = scattering::solve(medium, IncidentField::plane_wave(1.0), options);
  return scattering::unitarity_defect(sol.modes);
}

std::vector<Check> oracle_suite(const scattering::SolveOptions& options) {
  std::vector<Check> out;
  auto add = [&out](std::string name, double value, double tol) {
    out.push_back({std::move(name), value, tol, value <= tol});
  };
  for (int n : {2, 3}) {
    const std::string d = std::to_string(n) + "d";
    add("wronskian_" + d, wronskian_defect(n), 1e-12);
    add("mie_" + d, mie_discrepancy(n, 1.0, 1.0, 1.0, 4.0, options), 1e-9);
    add("mie_contrast_" + d, mie_discrepancy(n, 2.0, 1.0, 0.25, 3.0, options), 1e-9);
    add("complex_layers_" + d, layered_discrepancy(n, 1.0, options), 1e-8);
    add("lossless_unitarity_" + d, lossless_unitarity(n, options), 1e-8);
    // Energy balance for the complex layered medium with a source.
    Layer core = constant_layer(0.0, 0.5, cplx(1.0, 0.2), cplx(5.0, 1.0));
    core.source = RadialFn::constant(cplx(1.0, 0.5));
    LayeredMedium medium(n, {core, constant_layer(0.5, 1.0, cplx(0.3, 0.1), cplx(2.0, 3.0))});
    auto opts = options;
    opts.keep_interior = true;
    const auto sol = scattering::solve(medium, IncidentField::plane_wave(1.0), opts);
    add("energy_" + d, scattering::energy_report(sol, 1.0).residual, 1e-6);
  }
  return out;
}

}  // namespace cloak::validation
