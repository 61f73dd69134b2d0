#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cloak/oracles.hpp"
#include "cloak/radial_solver.hpp"
#include "cloak/specfun.hpp"

using namespace cloak;
using namespace cloak::radial;
using materials::AnisotropicProfile;

namespace {

Layer iso(double r0, double r1, cplx sigma, cplx q) {
  return {r0, r1, AnisotropicProfile::isotropic(RadialFn::constant(sigma), RadialFn::constant(q)),
          std::nullopt};
}

cplx scaled(const SolverState& s, cplx v) { return v * std::exp(s.scale_log()); }

cplx ratio(const RobinData& d) { return d.u_val / d.flux_val; }

// Invariant of a particular solution under adding homogeneous multiples.
cplx particular_invariant(cplx up, cplx wp, cplx u, cplx w) { return up - wp * u / w; }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

materials::CloakSpec standard(int n, double eps) {
  materials::CloakSpec s;
  s.dimension = n;
  s.epsilon = eps;
  return s;
}

}  // namespace

TEST_CASE("ode_rhs") {
  const Layer vac = iso(0.0, 2.0, 1.0, 1.0);
  const auto m0 = ModeIndex::make(2, 0);
  const double r = 0.9;
  const SolverState s{r, specfun::bessel_j(0, r), -r * specfun::bessel_j(1, r), 0};
  const auto [du, dw] = ode_rhs(vac, m0, 1.0, s);
  CHECK(std::abs(du - (-specfun::bessel_j(1, r))) < 1e-15);
  CHECK(std::abs(dw - (-r * specfun::bessel_j(0, r))) < 1e-15);

  const Layer no_q = iso(0.0, 2.0, 2.0, 0.0);
  for (int n : {2, 3}) {
    const auto m = ModeIndex::make(n, 2);
    const auto [a, b] = ode_rhs(no_q, m, 1.0, SolverState{r, 1.0, 0.0, 0});
    CHECK(a == cplx(0.0));
    CHECK(b.real() > 0.0);
    CHECK(std::abs(b - std::pow(r, n - 1) * m.lambda() * 2.0 / (r * r)) < 1e-14);
  }

  Layer src = iso(0.0, 1.0, 1.0, 3.0);
  src.source = RadialFn::constant(cplx(2.0, 1.0));
  const auto [du0, dw0] = ode_rhs(src, ModeIndex::make(3, 0), 1.0, SolverState{r, 0.0, 0.0, 0});
  CHECK(du0 == cplx(0.0));
  CHECK(std::abs(dw0 - r * r * cplx(2.0, 1.0)) < 1e-15);

  CHECK_THROWS_AS(ode_rhs(iso(0.0, 1.0, 0.0, 1.0), m0, 1.0, s), SolverError);
}

TEST_CASE("indicial exponents") {
  CHECK(std::abs(indicial_exponent(iso(0, 1, 2.0, 1.0), ModeIndex::make(2, 3)) - 3.0) < 1e-15);
  CHECK(std::abs(indicial_exponent(iso(0, 1, 2.0, 1.0), ModeIndex::make(3, 1)) - 1.0) < 1e-15);
  const Layer aniso{0.0, 1.0, {RadialFn::constant(1.0), RadialFn::constant(4.0), RadialFn::constant(1.0)},
                    std::nullopt};
  CHECK(std::abs(indicial_exponent(aniso, ModeIndex::make(2, 1)) - 2.0) < 1e-15);
  CHECK_THROWS(indicial_exponent(iso(0, 1, -1.0, 1.0), ModeIndex::make(2, 1)));
}

TEST_CASE("integrate_layer through vacuum reproduces J_0") {
  const Layer vac = iso(0.5, 1.0, 1.0, 1.0);
  const SolverState start{0.5, specfun::bessel_j(0, 0.5), -0.5 * specfun::bessel_j(1, 0.5), 0};
  const auto end = integrate_layer(start, vac, ModeIndex::make(2, 0), 1.0);
  CHECK(end.r == 1.0);
  CHECK(std::abs(scaled(end, end.u) - specfun::bessel_j(0, 1.0)) < 1e-9);
  CHECK(std::abs(scaled(end, end.w) + specfun::bessel_j(1, 1.0)) < 1e-9);

  SolverState ten = start;
  ten.u *= 10.0;
  ten.w *= 10.0;
  const auto end10 = integrate_layer(ten, vac, ModeIndex::make(2, 0), 1.0);
  CHECK(rel(scaled(end10, end10.u) / scaled(end10, end10.w), scaled(end, end.u) / scaled(end, end.w)) <
        1e-12);

  const auto same = integrate_layer(start, iso(0.5, 0.5, 1.0, 1.0), ModeIndex::make(2, 0), 1.0);
  CHECK(same.u == start.u);
  CHECK(same.w == start.w);
  CHECK(same.r == start.r);
}

TEST_CASE("complex constant layer against the power-series oracle") {
  const cplx s(0.7, 0.2), q(2.0, 1.5);
  const double omega = 1.3;
  const cplx kappa = omega * std::sqrt(q / s);
  for (int n : {2, 3}) {
    for (int k : {0, 1, 4}) {
      for (double radius : {0.4, 0.7, 1.0}) {
        const LayeredMedium m(n, {iso(0.0, radius, s, q)});
        const auto d = interior_response(m, ModeIndex::make(n, k), omega);
        const cplx z = kappa * radius;
        cplx j, jp;
        if (n == 2) {
          j = oracles::bessel_j_series(k, z);
          jp = k == 0 ? -oracles::bessel_j_series(1, z)
                      : 0.5 * (oracles::bessel_j_series(k - 1, z) - oracles::bessel_j_series(k + 1, z));
        } else {
          j = oracles::spherical_j_series(k, z);
          jp = k == 0 ? -oracles::spherical_j_series(1, z)
                      : (double(k) * oracles::spherical_j_series(k - 1, z) -
                         (k + 1.0) * oracles::spherical_j_series(k + 1, z)) / (2.0 * k + 1.0);
        }
        const cplx expect = j / (s * std::pow(radius, n - 1) * kappa * jp);
        CHECK(rel(ratio(d), expect) < 1e-8);
      }
    }
  }
}

TEST_CASE("vacuum medium Robin ratio") {
  const LayeredMedium m(2, {iso(0.0, 2.0, 1.0, 1.0)});
  const auto d = interior_response(m, ModeIndex::make(2, 1), 1.0);
  const double expect = specfun::bessel_j(1, 2.0) / (2.0 * specfun::bessel_j_prime(1, 2.0));
  CHECK(rel(ratio(d), expect) < 1e-9);
}

TEST_CASE("piecewise-constant media against transfer matrices") {
  const std::vector<std::vector<oracles::ConstantLayer>> cases{
      {{0.5, 1.0, 4.0, 0.0}, {1.0, 2.0, 0.5, 0.0}},
      {{0.3, cplx(1.0, 0.3), cplx(5.0, 2.0), cplx(1.0, -0.5)},
       {0.8, cplx(0.1, 0.05), cplx(1.0, 1.0), 0.0},
       {1.2, 3.0, cplx(0.2, 0.0), 0.0}},
  };
  for (const auto& layers : cases) {
    for (int n : {2, 3}) {
      std::vector<Layer> ls;
      double r = 0.0;
      for (const auto& c : layers) {
        Layer l = iso(r, c.r_outer, c.sigma, c.q);
        if (c.source != cplx(0.0)) l.source = RadialFn::constant(c.source);
        ls.push_back(l);
        r = c.r_outer;
      }
      const LayeredMedium m(n, ls);
      for (int k = 0; k <= 10; ++k) {
        const auto d = interior_response(m, ModeIndex::make(n, k), 1.0);
        const auto t = oracles::transfer_matrix(n, k, 1.0, layers);
        CHECK(rel(ratio(d), t.u / t.w) < 1e-8);
        CHECK(d.has_particular == m.has_source());
        if (!t.has_particular) {
          CHECK(d.u_p == cplx(0.0));
        } else {
          CHECK(rel(particular_invariant(d.u_p, d.w_p, d.u_val, d.flux_val),
                    particular_invariant(t.u_p, t.w_p, t.u, t.w)) < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("radial source excites mode 0 only") {
  Layer core = iso(0.0, 0.5, 1.0, cplx(1.0, 1.0));
  core.source = RadialFn::constant(1.0);
  const LayeredMedium m(2, {core, iso(0.5, 1.0, 0.5, 2.0)});
  const auto d0 = interior_response(m, ModeIndex::make(2, 0), 1.0);
  CHECK(d0.has_particular);
  CHECK(std::isfinite(std::abs(d0.u_p)));
  CHECK(std::abs(d0.u_p) > 0.0);
  const auto d1 = interior_response(m, ModeIndex::make(2, 1), 1.0);
  CHECK(d1.u_p == cplx(0.0));
  CHECK(d1.w_p == cplx(0.0));
}

TEST_CASE("tolerance convergence on the standard cloak") {
  const auto phys = materials::assemble_physical(standard(2, 0.1));
  const auto virt = materials::assemble_virtual(standard(2, 0.1));
  for (const auto* m : {&phys, &virt}) {
    for (int k : {0, 1, 3}) {
      SolverOptions a, b;
      a.rel_tol = 1e-8;
      b.rel_tol = 1e-9;
      const auto da = interior_response(*m, ModeIndex::make(2, k), 1.0, a);
      const auto db = interior_response(*m, ModeIndex::make(2, k), 1.0, b);
      CHECK(rel(ratio(da), ratio(db)) < 1e-7);
    }
  }
}

TEST_CASE("renormalization thresholds are transparent") {
  const auto phys = materials::assemble_physical(standard(3, 0.1));
  for (int k : {0, 5, 40}) {
    SolverOptions tight;
    tight.renorm_upper = 1e30;
    tight.renorm_lower = 1e-30;
    const auto a = interior_response(phys, ModeIndex::make(3, k), 1.0);
    const auto b = interior_response(phys, ModeIndex::make(3, k), 1.0, tight);
    CHECK(rel(ratio(a), ratio(b)) < 1e-12);
  }
}

TEST_CASE("an artificial interface changes nothing") {
  const auto phys = materials::assemble_physical(standard(2, 0.1));
  const auto split = phys.split_at(0.3).split_at(1.5);
  CHECK(split.layers().size() == phys.layers().size() + 2);
  SolverOptions o;
  o.rel_tol = 1e-13;
  for (int k : {0, 2, 7}) {
    const auto a = interior_response(phys, ModeIndex::make(2, k), 1.0, o);
    const auto b = interior_response(split, ModeIndex::make(2, k), 1.0, o);
    CHECK(rel(ratio(a), ratio(b)) < 1e-12);
  }
}
