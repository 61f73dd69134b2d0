#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "cloak/specfun.hpp"

using namespace cloak::specfun;
constexpr double kPi = std::numbers::pi;

namespace {

// J_n(x) = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt; the trapezoid rule is
// spectrally accurate for this periodic integrand.
double j_integral(int n, double x) {
  const int m = 1024;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double t = 2.0 * kPi * i / m;
    s += std::cos(n * t - x * std::sin(t));
  }
  return s / m;
}

template <class F>
double simpson(F f, double a, double b, int m) {
  const double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int i = 1; i < m; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Y_n(x) = (1/pi) int_0^pi sin(x sin t - n t) dt
//        - (1/pi) int_0^inf (e^{nt} + (-1)^n e^{-nt}) e^{-x sinh t} dt
double y_integral(int n, double x) {
  const double first = simpson([&](double t) { return std::sin(x * std::sin(t) - n * t); }, 0.0,
                               kPi, 20000);
  const double t_max = std::asinh(60.0 / x) + 1.0;
  const double sign = n % 2 ? -1.0 : 1.0;
  const double second = simpson(
      [&](double t) { return (std::exp(n * t) + sign * std::exp(-n * t)) * std::exp(-x * std::sinh(t)); },
      0.0, t_max, 40000);
  return (first - second) / kPi;
}

double j0_series(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -(x * x / 4.0) / (double(k) * k);
    sum += term;
  }
  return sum;
}

template <class F>
double bisect(F f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

const double kGrid[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0};

}  // namespace

TEST_CASE("bessel_j values at the origin and a first zero") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(1, 0.0) == 0.0);
  const double zero = bisect(j0_series, 2.0, 3.0);
  CHECK(std::abs(zero - 2.40482555769577) < 1e-12);
  CHECK(std::abs(bessel_j(0, 2.40482555769577)) < 1e-10);
}

TEST_CASE("bessel_j agrees with the integral representation") {
  for (int n : {0, 1, 2, 5, 10, 20}) {
    for (double x : {0.3, 1.0, 3.7, 9.0, 20.0, 45.0}) {
      const double ref = j_integral(n, x);
      CHECK(std::abs(bessel_j(n, x) - ref) <= 1e-12 * std::max(1e-3, std::abs(ref)));
    }
  }
}

TEST_CASE("bessel_y agrees with the integral representation and its first zero") {
  for (int n : {0, 1, 3}) {
    for (double x : {0.5, 1.0, 2.5, 7.0}) {
      const double ref = y_integral(n, x);
      CHECK(std::abs(bessel_y(n, x) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
  const double zero = bisect([](double x) { return y_integral(0, x); }, 0.5, 1.5);
  CHECK(std::abs(zero - 0.89357696627916) < 1e-10);
  CHECK(std::abs(bessel_y(0, 0.89357696627916)) < 1e-9);
}

TEST_CASE("bessel_y near the origin and domain errors") {
  const double y = bessel_y(0, 1e-8);
  CHECK(std::isfinite(y));
  CHECK(y < -10.0);
  CHECK_THROWS(bessel_y(0, 0.0));
  CHECK_THROWS(bessel_y(0, -1.0));
  CHECK_THROWS(bessel_j(201, 1.0));
  CHECK_THROWS(spherical_y(0, 0.0));
}

TEST_CASE("hankel1 definition and large-argument behavior") {
  const auto h = hankel1(0, 1.0);
  CHECK(h.real() == bessel_j(0, 1.0));
  CHECK(h.imag() == bessel_y(0, 1.0));
  for (int n : {0, 3, 17}) CHECK(hankel1(n, 2.2).imag() == bessel_y(n, 2.2));
  const std::complex<double> lead =
      std::sqrt(2.0 / (50.0 * kPi)) * std::exp(std::complex<double>(0.0, 50.0 - kPi / 4));
  CHECK(std::abs(hankel1(0, 50.0) - lead) <= 2e-3);
}

TEST_CASE("cylindrical Wronskian and recurrence on the grid") {
  for (int n = 0; n <= 20; ++n) {
    for (double x : kGrid) {
      const double w = bessel_j(n, x) * bessel_y_prime(n, x) - bessel_j_prime(n, x) * bessel_y(n, x);
      const double ref = 2.0 / (kPi * x);
      CHECK(std::abs(w - ref) <= 1e-12 * ref);
      if (n >= 1) {
        const double lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
        const double rhs = 2.0 * n / x * bessel_j(n, x);
        CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max({std::abs(lhs), std::abs(bessel_j(n - 1, x)), 1e-300}));
      }
    }
  }
  const double x = 1.7;
  CHECK(std::abs(bessel_j(1, x) * bessel_y_prime(1, x) - bessel_j_prime(1, x) * bessel_y(1, x) -
                 2.0 / (kPi * x)) <= 1e-12);
}

TEST_CASE("spherical functions") {
  CHECK(std::abs(spherical_j(0, kPi)) <= 1e-14);
  CHECK(std::abs(spherical_y(0, kPi / 2)) <= 1e-14);
  CHECK(std::abs(spherical_j_prime(0, kPi / 2) + 4.0 / (kPi * kPi)) <= 1e-13);
  const double x = 2.3;
  CHECK(std::abs(spherical_j(5, x) * spherical_y_prime(5, x) -
                 spherical_j_prime(5, x) * spherical_y(5, x) - 1.0 / (x * x)) <= 1e-12 / (x * x));
  for (int l = 0; l <= 20; ++l) {
    for (double z : kGrid) {
      const double w =
          spherical_j(l, z) * spherical_y_prime(l, z) - spherical_j_prime(l, z) * spherical_y(l, z);
      CHECK(std::abs(w - 1.0 / (z * z)) <= 1e-12 / (z * z));
    }
  }
  // Closed forms for l = 1, 2.
  for (double z : {0.7, 3.0, 12.0}) {
    const double j1 = std::sin(z) / (z * z) - std::cos(z) / z;
    const double j2 = (3.0 / (z * z) - 1.0) * std::sin(z) / z - 3.0 * std::cos(z) / (z * z);
    CHECK(std::abs(spherical_j(1, z) - j1) <= 1e-14);
    CHECK(std::abs(spherical_j(2, z) - j2) <= 1e-14);
    CHECK(spherical_h1(2, z).imag() == spherical_y(2, z));
  }
}

TEST_CASE("derivatives agree with central differences") {
  const double x = 3.1;
  const double h = 1e-5;
  auto fd = [&](auto f) { return (f(x + h) - f(x - h)) / (2 * h); };
  CHECK(std::abs(bessel_j_prime(0, 1.0) + bessel_j(1, 1.0)) <= 1e-14);
  // Absolute tolerance for O(1) values; large irregular values at high order are
  // compared relatively since the difference quotient itself carries eps*|f|/h.
  auto close = [](auto exact, auto approx) {
    return std::abs(exact - approx) <= 1e-6 * std::max(1.0, std::abs(exact));
  };
  for (int n : {0, 1, 4, 12}) {
    CHECK(close(bessel_j_prime(n, x), fd([n](double t) { return bessel_j(n, t); })));
    CHECK(close(bessel_y_prime(n, x), fd([n](double t) { return bessel_y(n, t); })));
    CHECK(close(hankel1_prime(n, x), fd([n](double t) { return hankel1(n, t); })));
    CHECK(close(spherical_j_prime(n, x), fd([n](double t) { return spherical_j(n, t); })));
    CHECK(close(spherical_y_prime(n, x), fd([n](double t) { return spherical_y(n, t); })));
    CHECK(close(spherical_h1_prime(n, x), fd([n](double t) { return spherical_h1(n, t); })));
  }
}

TEST_CASE("signed order symmetry") {
  for (int n : {1, 2, 7}) {
    const double s = n % 2 ? -1.0 : 1.0;
    CHECK(bessel_j_signed(-n, 2.5) == doctest::Approx(s * bessel_j(n, 2.5)).epsilon(1e-15));
  }
}

TEST_CASE("legendre_p") {
  for (double t : {-1.0, -0.2, 0.0, 0.9}) CHECK(legendre_p(0, t) == 1.0);
  CHECK(legendre_p(1, 0.3) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(legendre_p(5, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  const double t = 0.37;
  CHECK(legendre_p(3, t) == doctest::Approx(0.5 * (5 * t * t * t - 3 * t)).epsilon(1e-14));
  CHECK_THROWS(legendre_p(2, 1.5));
}
