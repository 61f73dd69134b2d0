#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cloak/scattering.hpp"
#include "cloak/specfun.hpp"
#include "cloak/validation.hpp"

using namespace cloak;
using namespace cloak::scattering;
using materials::AnisotropicProfile;
using radial::Layer;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

Layer iso(double r0, double r1, cplx sigma, cplx q) {
  return {r0, r1, AnisotropicProfile::isotropic(RadialFn::constant(sigma), RadialFn::constant(q)),
          std::nullopt};
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

double sup_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

materials::CloakSpec cloak_spec(int n, double eps) {
  materials::CloakSpec s;
  s.dimension = n;
  s.epsilon = eps;
  return s;
}

SolveOptions with_interior() {
  SolveOptions o;
  o.keep_interior = true;
  return o;
}

// Homogeneous ball: interior c*j(kappa r), flux continuity sigma u' = u' outside.
cplx ball_coefficient(int dim, int k, double omega, double radius, double sigma, double q, cplx b) {
  const double kappa = omega * std::sqrt(q / sigma);
  const double x = omega * radius, y = kappa * radius;
  double ji, jip, j, jp;
  cplx h, hp;
  if (dim == 2) {
    ji = specfun::bessel_j(k, y);
    jip = specfun::bessel_j_prime(k, y);
    j = specfun::bessel_j(k, x);
    jp = specfun::bessel_j_prime(k, x);
    h = specfun::hankel1(k, x);
    hp = specfun::hankel1_prime(k, x);
  } else {
    ji = specfun::spherical_j(k, y);
    jip = specfun::spherical_j_prime(k, y);
    j = specfun::spherical_j(k, x);
    jp = specfun::spherical_j_prime(k, x);
    h = specfun::spherical_h1(k, x);
    hp = specfun::spherical_h1_prime(k, x);
  }
  const double in = sigma * kappa * jip;
  return -b * (in * j - omega * ji * jp) / (in * h - omega * ji * hp);
}

std::vector<ModeSolution> replace_a(std::vector<ModeSolution> modes, auto coefficient) {
  for (auto& m : modes) m.a = coefficient(m);
  return modes;
}

}  // namespace

TEST_CASE("incident coefficients") {
  const auto pw = IncidentField::plane_wave(1.0);
  CHECK(std::abs(incident_coeffs(pw, radial::ModeIndex::make(2, 0)) - 1.0) < 1e-15);
  CHECK(std::abs(incident_coeffs(pw, radial::ModeIndex::make(3, 1)) - cplx(0.0, 3.0)) < 1e-15);
  CHECK(incident_coeffs(IncidentField::none(1.0), radial::ModeIndex::make(2, 3)) == cplx(0.0));
}

TEST_CASE("plane-wave expansion reproduces the plane wave") {
  const double omega = 2.0, r = 1.3, theta = 0.7;
  for (double angle : {0.0, 1.1}) {
    auto pw = IncidentField::plane_wave(omega, angle);
    cplx sum = 0.0;
    for (int n = -25; n <= 25; ++n) {
      const auto m = radial::ModeIndex::make(2, std::abs(n));
      sum += incident_coeffs(pw, m, n) * specfun::bessel_j(std::abs(n), omega * r) *
             std::exp(kI * (n * theta));
    }
    CHECK(std::abs(sum - std::exp(kI * (omega * r * std::cos(theta - angle)))) < 1e-10);
  }
  const auto pw3 = IncidentField::plane_wave(omega);
  cplx sum = 0.0;
  for (int l = 0; l <= 25; ++l) {
    sum += incident_coeffs(pw3, radial::ModeIndex::make(3, l)) * specfun::spherical_j(l, omega * r) *
           specfun::legendre_p(l, std::cos(theta));
  }
  CHECK(std::abs(sum - std::exp(kI * (omega * r * std::cos(theta)))) < 1e-10);
}

TEST_CASE("vacuum scatters nothing") {
  for (int n : {2, 3}) {
    const LayeredMedium m(n, {iso(0.0, 1.0, 1.0, 1.0)});
    const auto sol = solve(m, IncidentField::plane_wave(1.0, n == 2 ? 0.4 : 0.0));
    CHECK(sol.far.sup_norm <= 1e-12);
  }
}

TEST_CASE("far field of a single mode") {
  ModeSolution m{radial::ModeIndex::make(2, 0), 0, 0.0, 1.0, 0.0};
  for (double omega : {0.5, 1.0, 3.0}) {
    const auto far = far_field(2, omega, {m}, DirectionGrid::make(2));
    CHECK(std::abs(far.sup_norm - std::sqrt(2.0 / (kPi * omega))) < 1e-14);
    CHECK(std::abs(far.l2_norm - std::sqrt(2.0 / (kPi * omega)) * std::sqrt(2.0 * kPi)) < 1e-12);
  }
  const auto empty = far_field(2, 1.0, {}, DirectionGrid::make(2));
  CHECK(empty.sup_norm == 0.0);
  CHECK_THROWS(DirectionGrid::make(2, 100));
}

TEST_CASE("far field matches the scattered field at large radius") {
  const double omega = 1.0, r = 1e4;
  for (int n : {2, 3}) {
    const auto sol = solve(materials::assemble_physical(cloak_spec(n, 0.2)), IncidentField::plane_wave(omega));
    for (double theta : {0.0, 0.9, 2.5}) {
      cplx us = 0.0;
      for (const auto& m : sol.modes) {
        if (n == 2) {
          us += m.a * specfun::hankel1(m.mode.k, omega * r) * std::exp(kI * (m.n * theta));
        } else {
          us += m.a * specfun::spherical_h1(m.mode.k, omega * r) * specfun::legendre_p(m.mode.k, std::cos(theta));
        }
      }
      const cplx a = far_field_value(n, omega, sol.modes, theta);
      const cplx decay = std::exp(kI * (omega * r)) / (n == 2 ? std::sqrt(r) : r);
      CHECK(rel(us, a * decay) < 1e-3);
    }
  }
}

TEST_CASE("conductivity limits of a small disk") {
  // Vanishing conductivity decouples the interior flux (Neumann); a huge one pins
  // the interior to zero for every mode with q scaled alongside (Dirichlet).
  const double tau = 0.3, omega = 1.0;
  for (double s : {1e-8, 1e8}) {
    const LayeredMedium m(2, {iso(0.0, tau, s, s)});
    const auto sol = solve(m, IncidentField::plane_wave(omega));
    for (const auto& mode : sol.modes) {
      if (std::abs(mode.n) > 3) continue;
      const int k = mode.mode.k;
      const double x = omega * tau;
      const cplx expect = s < 1.0 ? -mode.b * specfun::bessel_j_prime(k, x) / specfun::hankel1_prime(k, x)
                                  : -mode.b * specfun::bessel_j(k, x) / specfun::hankel1(k, x);
      CHECK(rel(mode.a, expect) < 1e-5);
    }
  }
}

TEST_CASE("homogeneous balls against closed-form coefficients") {
  for (int n : {2, 3}) {
    for (double omega : {0.5, 1.0, 2.0}) {
      for (double radius : {0.3, 1.0}) {
        for (auto [sigma, q] : {std::pair{1.0, 4.0}, std::pair{0.25, 3.0}}) {
          const auto sol = solve(LayeredMedium(n, {iso(0.0, radius, sigma, q)}),
                                 IncidentField::plane_wave(omega));
          const auto exact = replace_a(sol.modes, [&](const ModeSolution& m) {
            return ball_coefficient(n, m.mode.k, omega, radius, sigma, q, m.b);
          });
          const auto ref = far_field(n, omega, exact, DirectionGrid::make(n));
          CHECK(sup_diff(sol.far.values, ref.values) <= 1e-9 * ref.sup_norm);
        }
      }
    }
  }
}

TEST_CASE("rotating the incident wave rotates the far field") {
  const auto m = materials::assemble_physical(cloak_spec(2, 0.1));
  const double phi = 0.7;
  const auto base = solve(m, IncidentField::plane_wave(1.0));
  const auto turned = solve(m, IncidentField::plane_wave(1.0, phi));
  double d = 0.0;
  for (double theta : turned.far.angles) {
    d = std::max(d, std::abs(far_field_value(2, 1.0, turned.modes, theta) -
                             far_field_value(2, 1.0, base.modes, theta - phi)));
  }
  CHECK(d <= 1e-12 * base.far.sup_norm);
}

TEST_CASE("radial changes of variables leave the far field unchanged") {
  for (int n : {2, 3}) {
    const LayeredMedium m(n, {iso(0.0, 0.5, 1.0, 5.0), iso(0.5, 1.0, cplx(2.0, 0.5), cplx(1.0, 1.0)),
                              iso(1.0, 2.0, 1.0, 1.0)});
    const auto base = solve(m, IncidentField::plane_wave(1.0));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto map = validation::random_radial_map(2.0, 3, seed);
      const auto moved = solve(materials::push_forward_medium(map, m), IncidentField::plane_wave(1.0));
      CHECK(sup_diff(moved.far.values, base.far.values) <= 1e-7 * base.far.sup_norm);
    }
  }
}

TEST_CASE("mode truncation") {
  CHECK(truncation_order(1.0, 2.0, 1e-10) == 17);
  CHECK(truncation_order(0.1, 0.5, 1e-10) == 16);
  CHECK_THROWS(truncation_order(1.0, 2.0, 0.0));
  SolveOptions bad;
  bad.tail_tol = 0.0;
  CHECK_THROWS(solve(LayeredMedium(2, {iso(0.0, 1.0, 2.0, 1.0)}), IncidentField::plane_wave(1.0), bad));

  const auto sol = solve(materials::assemble_virtual(cloak_spec(2, 0.05)), IncidentField::plane_wave(1.0));
  CHECK(sol.k_max <= 17);
  cplx a0 = 0.0, a5 = 0.0;
  for (const auto& m : sol.modes) {
    if (m.n == 0) a0 = m.a;
    if (m.n == 5) a5 = m.a;
  }
  CHECK(std::abs(a5) < 1e-6 * std::abs(a0));
}

TEST_CASE("energy balance") {
  for (int n : {2, 3}) {
    const auto lossless =
        solve(LayeredMedium(n, {iso(0.0, 0.6, 2.0, 3.0), iso(0.6, 1.0, 0.5, 1.5)}),
              IncidentField::plane_wave(1.0), with_interior());
    const auto e0 = energy_report(lossless, 1.0);
    CHECK(std::abs(e0.absorbed_volume) <= 1e-12);
    CHECK(std::abs(e0.boundary_flux) <= 1e-8);
    CHECK(unitarity_defect(lossless.modes) <= 1e-8);

    const auto lossy = solve(materials::assemble_physical(cloak_spec(n, 0.1)),
                             IncidentField::plane_wave(1.0), with_interior());
    const auto e = energy_report(lossy, 1.0);
    CHECK(e.absorbed_volume >= -1e-10);
    CHECK(e.residual <= 1e-6);
  }
  const auto plain = solve(LayeredMedium(2, {iso(0.0, 1.0, 1.0, 2.0)}), IncidentField::plane_wave(1.0));
  CHECK_THROWS_AS(energy_report(plain, 1.0), std::logic_error);
}

TEST_CASE("singular matching system") {
  radial::RobinData d;
  d.r_ext = 1.0;
  d.u_val = 0.0;
  d.flux_val = 0.0;
  CHECK_THROWS_AS(match_mode(d, radial::ModeIndex::make(2, 1), 1.0, 1.0, 1.0), DegenerateMatch);
  int reported = -1;
  try {
    match_mode(d, radial::ModeIndex::make(2, 4), 1.0, 1.0, 1.0);
  } catch (const DegenerateMatch& e) {
    reported = e.mode();
  }
  CHECK(reported == 4);
}
