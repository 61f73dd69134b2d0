#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <random>

#include "cloak/materials.hpp"

using namespace cloak;
using namespace cloak::materials;

namespace {

bool near(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

using Mat = std::array<std::array<double, 3>, 3>;

double det3(const Mat& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Full 3D map y -> f(|y|) y / |y| and its central-difference Jacobian.
std::array<double, 3> map_point(const RadialMap& f, const std::array<double, 3>& y) {
  const double t = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
  const double s = f(t) / t;
  return {s * y[0], s * y[1], s * y[2]};
}

Mat jacobian(const RadialMap& f, const std::array<double, 3>& y) {
  Mat m{};
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    auto yp = y, ym = y;
    yp[j] += h;
    ym[j] -= h;
    const auto fp = map_point(f, yp), fm = map_point(f, ym);
    for (int i = 0; i < 3; ++i) m[i][j] = (fp[i] - fm[i]) / (2 * h);
  }
  return m;
}

CloakSpec standard(int n, double eps) {
  CloakSpec s;
  s.dimension = n;
  s.epsilon = eps;
  return s;
}

}  // namespace

TEST_CASE("coefficient functions") {
  const auto c = CoefficientFn::constant({2.0, -1.0});
  CHECK(c(0.3) == cplx(2.0, -1.0));
  const auto p = CoefficientFn::polynomial({1.0, cplx(0.0, 2.0), 3.0});
  CHECK(near(p(0.5), cplx(1.0 + 0.75, 1.0), 1e-15));
  const auto t = CoefficientFn::table({{0.0, 1.0}, {1.0, cplx(3.0, 2.0)}});
  CHECK(near(t(0.25), cplx(1.5, 0.5), 1e-15));
  CHECK_THROWS_AS(t(1.5), std::domain_error);
  CHECK_THROWS(CoefficientFn::table({{0.0, 1.0}, {0.0, 2.0}}));
  CHECK_THROWS(CoefficientFn::table({{0.0, 1.0}}));
}

TEST_CASE("blowup map endpoints and affinity") {
  const auto f = blowup_map(0.5);
  CHECK(f(0.5) == 1.0);
  CHECK(f(2.0) == 2.0);
  CHECK(f(1.25) == doctest::Approx(1.5).epsilon(1e-15));
  for (double eps : {0.5, 0.1, 0.01}) {
    const auto g = blowup_map(eps);
    CHECK(std::abs(g(eps) - 1.0) <= 1e-15);
    CHECK(std::abs(g(2.0) - 2.0) <= 1e-15);
    CHECK(g.b() == doctest::Approx(1.0 / (2.0 - eps)).epsilon(1e-15));
    CHECK(g.a() == doctest::Approx((2.0 - 2.0 * eps) / (2.0 - eps)).epsilon(1e-15));
  }
  const auto id = blowup_map(1.0 - 1e-12);
  CHECK(std::abs(id.a()) < 1e-11);
  CHECK(std::abs(id.b() - 1.0) < 1e-11);
  CHECK_THROWS(blowup_map(0.0));
  CHECK_THROWS(blowup_map(1.0));
}

TEST_CASE("push-forward of the identity map leaves the profile unchanged") {
  const AnisotropicProfile p{CoefficientFn::polynomial({1.0, 0.5}), CoefficientFn::constant(2.0),
                             CoefficientFn::polynomial({cplx(1.0, 0.1), 2.0})};
  const auto id = RadialMap::between(0.5, 1.5, 0.5, 1.5);
  const auto q = push_forward_radial(id, p, 3);
  for (double s : {0.5, 0.8, 1.5}) {
    CHECK(near(q.sigma_r(s), p.sigma_r(s), 1e-14));
    CHECK(near(q.sigma_t(s), p.sigma_t(s), 1e-14));
    CHECK(near(q.q(s), p.q(s), 1e-14));
  }
}

TEST_CASE("push-forward of vacuum in 3D: closed form and finite-difference Jacobian") {
  const auto f = blowup_map(0.2);
  const auto p = push_forward_radial(f, AnisotropicProfile::vacuum(), 3);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(0.2, 2.0), unit(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    std::array<double, 3> dir{unit(rng), unit(rng), unit(rng)};
    const double len = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    const double t = radius(rng);
    std::array<double, 3> y{t * dir[0] / len, t * dir[1] / len, t * dir[2] / len};
    const double s = f(t);
    CHECK(near(p.sigma_r(s), f.b() * (t / s) * (t / s), 1e-12));
    CHECK(near(p.sigma_t(s), 1.0 / f.b(), 1e-12));
    CHECK(near(p.q(s), (t / s) * (t / s) / f.b(), 1e-12));

    // sigma' = DF DF^T / det DF, projected on radial and a tangential direction.
    const Mat m = jacobian(f, y);
    const double det = det3(m);
    Mat sig{};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) sig[a][b] += m[a][c] * m[b][c] / det;
    std::array<double, 3> e{y[0] / t, y[1] / t, y[2] / t};
    // A unit vector orthogonal to e.
    std::array<double, 3> g{-e[1], e[0], 0.0};
    const double gl = std::sqrt(g[0] * g[0] + g[1] * g[1]);
    for (auto& v : g) v /= gl;
    double rr = 0.0, tt = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        rr += e[a] * sig[a][b] * e[b];
        tt += g[a] * sig[a][b] * g[b];
      }
    CHECK(std::abs(rr - p.sigma_r(s).real()) <= 1e-8 * std::abs(rr));
    CHECK(std::abs(tt - p.sigma_t(s).real()) <= 1e-8 * std::abs(tt));
    CHECK(std::abs(1.0 / det - p.q(s).real()) <= 1e-8 / det);
  }
}

TEST_CASE("push-forward composes") {
  const AnisotropicProfile p{CoefficientFn::polynomial({1.0, 0.3}), CoefficientFn::constant(cplx(2.0, 0.1)),
                             CoefficientFn::polynomial({cplx(1.0, 0.5), 0.2})};
  const auto m1 = RadialMap::between(0.5, 1.0, 0.7, 1.4);
  const auto m2 = RadialMap::between(0.7, 1.4, 1.0, 2.0);
  for (int n : {2, 3}) {
    const auto twice = push_forward_radial(m2, push_forward_radial(m1, p, n), n);
    const auto once = push_forward_radial(m2.compose(m1), p, n);
    for (double s : {1.0, 1.3, 1.77, 2.0}) {
      CHECK(near(twice.sigma_r(s), once.sigma_r(s), 1e-10));
      CHECK(near(twice.sigma_t(s), once.sigma_t(s), 1e-10));
      CHECK(near(twice.q(s), once.q(s), 1e-10));
    }
  }
}

TEST_CASE("push-forward preserves ellipticity and absorption sign") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const AnisotropicProfile p{
        CoefficientFn::polynomial({0.1 + u(rng), cplx(u(rng), u(rng))}),
        CoefficientFn::constant(cplx(0.1 + u(rng), u(rng))),
        CoefficientFn::polynomial({cplx(u(rng) - 0.5, u(rng)), cplx(0.0, u(rng))})};
    const double t0 = 0.5 * u(rng), t1 = t0 + 0.1 + u(rng);
    const double s0 = 0.5 * u(rng), s1 = s0 + 0.1 + u(rng);
    const auto m = RadialMap::between(t0, t1, s0, s1);
    for (int n : {2, 3}) {
      const auto q = push_forward_radial(m, p, n);
      for (int i = 0; i <= 10; ++i) {
        const double s = s0 + (s1 - s0) * i / 10.0;
        if (s <= 0.0) continue;
        CHECK(q.sigma_r(s).real() > 0.0);
        CHECK(q.sigma_t(s).real() > 0.0);
        CHECK(q.q(s).imag() >= 0.0);
      }
    }
  }
}

TEST_CASE("lossy layer of the physical medium") {
  auto s = standard(2, 0.1);
  auto l = lossy_layer_physical(s);
  CHECK(l.r_inner == 0.5);
  CHECK(l.r_outer == 1.0);
  CHECK(near(l.profile.sigma_r(0.7), 0.01, 1e-14));
  CHECK(near(l.profile.sigma_t(0.7), 0.01, 1e-14));
  CHECK(near(l.profile.q(0.7), cplx(0.01, 0.01), 1e-14));
  s = standard(3, 0.1);
  l = lossy_layer_physical(s);
  CHECK(near(l.profile.sigma_r(0.6), 1e-3, 1e-14));
  CHECK(near(l.profile.q(0.6), cplx(1e-3, 1e-3), 1e-14));
  s.lossy.gamma = CoefficientFn::polynomial({0.5, 1.0});
  l = lossy_layer_physical(s);
  CHECK(near(l.profile.sigma_r(0.75), std::pow(0.1, 3.0) * 1.25, 1e-14));
}

TEST_CASE("physical assembly: interfaces and cloak shell ellipticity") {
  for (int n : {2, 3}) {
    const auto m = assemble_physical(standard(n, 0.05));
    REQUIRE(m.layers().size() == 3);
    CHECK(m.layers()[0].r_outer == 0.5);
    CHECK(m.layers()[1].r_outer == 1.0);
    CHECK(m.layers()[2].r_outer == 2.0);
    const auto& shell = m.layers()[2].profile;
    for (int i = 0; i < 100; ++i) {
      const double r = 1.0 + (i + 0.5) / 100.0;
      CHECK(shell.sigma_r(r).real() > 0.0);
      CHECK(shell.sigma_t(r).real() > 0.0);
    }
  }
}

TEST_CASE("virtual assembly scalings") {
  auto s = standard(2, 0.1);
  s.core.sigma_r = s.core.sigma_t = CoefficientFn::polynomial({1.0, 2.0});
  s.core.q = CoefficientFn::constant(cplx(1.0, 1.0));
  s.source = CoefficientFn::constant(3.0);
  const auto v = assemble_virtual(s);
  REQUIRE(v.layers().size() == 2);
  CHECK(v.layers()[0].r_outer == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(v.layers()[1].r_outer == doctest::Approx(0.1).epsilon(1e-15));
  const auto& core = v.layers()[0];
  CHECK(near(core.profile.sigma_r(0.03), 1.0 + 2.0 * 0.3, 1e-14));
  CHECK(near(core.profile.q(0.03), cplx(100.0, 100.0), 1e-14));
  CHECK(near((*core.source)(0.02), 300.0, 1e-14));
  const auto& lossy = v.layers()[1].profile;
  CHECK(near(lossy.sigma_r(0.07), 0.01, 1e-14));
  CHECK(near(lossy.q(0.07), cplx(1.0, 1.0), 1e-14));

  s.dimension = 3;
  const auto v3 = assemble_virtual(s);
  CHECK(near(v3.layers()[0].profile.sigma_r(0.03), 10.0 * 1.6, 1e-14));
  CHECK(near((*v3.layers()[0].source)(0.02), 3000.0, 1e-12));
}

TEST_CASE("virtual medium pushed forward by the full map equals the physical medium") {
  for (int n : {2, 3}) {
    for (double eps : {0.2, 0.1}) {
      auto s = standard(n, eps);
      s.core.sigma_r = CoefficientFn::polynomial({1.0, 0.5});
      s.core.q = CoefficientFn::polynomial({cplx(5.0, 1.0), 1.0});
      s.source = CoefficientFn::polynomial({1.0, -1.0});
      s.lossy.gamma = CoefficientFn::polynomial({0.5, 1.0});
      s.lossy.beta = CoefficientFn::table({{0.5, 1.0}, {1.0, 2.0}});
      const auto phys = assemble_physical(s);
      const auto pushed =
          push_forward_medium(full_blowup_map(eps), assemble_virtual(s).extended_to(kOuterRadius));
      REQUIRE(pushed.layers().size() == phys.layers().size());
      for (std::size_t i = 0; i < phys.layers().size(); ++i) {
        const auto& a = phys.layers()[i];
        const auto& b = pushed.layers()[i];
        CHECK(std::abs(a.r_outer - b.r_outer) <= 1e-15);
        CHECK(a.source.has_value() == b.source.has_value());
        for (int j = 0; j < 50; ++j) {
          const double r = a.r_inner + (a.r_outer - a.r_inner) * (j + 0.5) / 50.0;
          CHECK(near(b.profile.sigma_r(r), a.profile.sigma_r(r), 1e-10));
          CHECK(near(b.profile.sigma_t(r), a.profile.sigma_t(r), 1e-10));
          CHECK(near(b.profile.q(r), a.profile.q(r), 1e-10));
          if (a.source) CHECK(near((*b.source)(r), (*a.source)(r), 1e-10));
        }
      }
    }
  }
}

TEST_CASE("spec validation") {
  auto s = standard(2, 0.1);
  s.r_exponent = 0.4;
  try {
    validate(s);
    FAIL("expected rejection");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("2 - N/2 = 1") != std::string::npos);
  }
  s = standard(3, 0.1);
  s.r_exponent = 0.5;
  CHECK_THROWS_AS(validate(s), SpecError);
  s.r_exponent = 0.51;
  CHECK_NOTHROW(validate(s));

  s = standard(2, 0.1);
  s.lossy.beta = CoefficientFn::constant(0.0);
  CHECK_THROWS_AS(validate(s), SpecError);

  s = standard(2, 0.1);
  s.source = CoefficientFn::constant(1.0);
  CHECK_THROWS_AS(validate(s), SpecError);  // Im q_a = 0 under a source
  s.allow_buster = true;
  CHECK_NOTHROW(validate(s));
  s.allow_buster = false;
  s.core.q = CoefficientFn::constant(cplx(1.0, 1.0));
  CHECK(validate(s).absorption_floor.value() == doctest::Approx(1.0));
  s.absorption_floor = 2.0;
  CHECK_THROWS_AS(validate(s), SpecError);

  s = standard(2, 0.1);
  s.core.q = CoefficientFn::constant(cplx(1.0, -0.1));
  CHECK_THROWS_AS(validate(s), SpecError);
  s = standard(2, 1.0);
  CHECK_THROWS_AS(validate(s), SpecError);
  s = standard(4, 0.1);
  CHECK_THROWS_AS(validate(s), SpecError);
}

TEST_CASE("layered medium structure") {
  const Layer a{0.0, 1.0, AnisotropicProfile::isotropic(RadialFn::constant(2.0), RadialFn::constant(1.0)), std::nullopt};
  const Layer gap{1.1, 2.0, AnisotropicProfile::vacuum(), std::nullopt};
  CHECK_THROWS_AS(LayeredMedium(2, {a, gap}), SpecError);
  Layer outer{1.0, 2.0, AnisotropicProfile::vacuum(), RadialFn::constant(1.0)};
  CHECK_THROWS_AS(LayeredMedium(2, {a, outer}), SpecError);
  outer.source.reset();
  const LayeredMedium m(3, {a, outer});
  CHECK(m.matching_radius() == 1.0);
  CHECK(m.trimmed().r_ext() == 1.0);
  CHECK(m.split_at(0.5).layers().size() == 3);
  CHECK(m.extended_to(3.0).r_ext() == 3.0);
}
