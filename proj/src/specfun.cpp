#include "cloak/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace cloak::specfun {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;

// Above this argument J_0, J_1, Y_0, Y_1 come from the Hankel asymptotic series.
constexpr double kAsymptoticThreshold = 25.0;
constexpr double kRescaleAbove = 1.0e250;

void check_argument(double x, bool allow_zero) {
  if (!std::isfinite(x) || x < 0.0 || (!allow_zero && x == 0.0)) {
    throw std::domain_error("Bessel argument " + std::to_string(x) +
                            (allow_zero ? " must be >= 0" : " must be > 0"));
  }
  if (x > kMaxArgument) {
    throw std::domain_error("Bessel argument " + std::to_string(x) + " exceeds cap " +
                            std::to_string(kMaxArgument));
  }
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::overflow_error(std::string(what) + " is not representable in double precision");
  }
  return v;
}

// Hankel's large-argument expansion: returns (J_nu, Y_nu) for nu in {0, 1}.
std::pair<double, double> hankel_asymptotic(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(term) > last) break;  // asymptotic series started diverging
    last = std::abs(term);
    // a_k / x^k contributes to P (even k) or Q (odd k), with alternating sign.
    const int pair = k / 2;
    const double signed_term = (pair % 2 == 0) ? term : -term;
    if (k % 2 == 0) {
      p += signed_term;
    } else {
      q += signed_term;
    }
    if (last < 1e-17) break;
  }
  const double chi = x - (0.5 * nu + 0.25) * kPi;
  const double amp = std::sqrt(2.0 / (kPi * x));
  const double c = std::cos(chi);
  const double s = std::sin(chi);
  return {amp * (p * c - q * s), amp * (p * s + q * c)};
}

// Ascending series for J_n(x); used where the first term dominates.
double bessel_j_series(int n, double x) {
  const double log_pref = n * std::log(0.5 * x) - std::lgamma(n + 1.0);
  const double y = -0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= y / (k * static_cast<double>(n + k));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::exp(log_pref) * sum;
}

// Miller backward recurrence, normalized by J_0 + 2 sum_k J_2k = 1.
// Returns J_0..J_kmax.
std::vector<double> bessel_j_miller(int kmax, double x) {
  const double top = std::max(static_cast<double>(kmax), x);
  int start = static_cast<int>(top) + 30 + static_cast<int>(std::sqrt(60.0 * top));
  start += start % 2;  // even
  std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1.0e-30;
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    j[k - 1] = (2.0 * k / x) * j[k] - j[k + 1];
    if (std::abs(j[k - 1]) > kRescaleAbove) {
      for (int i = k - 1; i <= start; ++i) j[i] /= kRescaleAbove;
      norm /= kRescaleAbove;
    }
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j[k - 1];
  }
  norm += j[0];
  j.resize(static_cast<std::size_t>(kmax) + 1);
  for (double& v : j) v /= norm;
  return j;
}

double bessel_j_impl(int n, double x) {
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x <= 2.0 || 0.25 * x * x < 0.1 * (n + 1)) return bessel_j_series(n, x);
  if (x > kAsymptoticThreshold && n < x) {
    const double j0 = hankel_asymptotic(0, x).first;
    if (n == 0) return j0;
    const double j1 = hankel_asymptotic(1, x).first;
    // Forward recurrence is stable while the order stays below the argument.
    double prev = j0;
    double cur = j1;
    for (int k = 1; k < n; ++k) {
      const double next = (2.0 * k / x) * cur - prev;
      prev = cur;
      cur = next;
    }
    return cur;
  }
  return bessel_j_miller(n, x)[n];
}

std::pair<double, double> bessel_y01(double x) {
  if (x > kAsymptoticThreshold) {
    return {hankel_asymptotic(0, x).second, hankel_asymptotic(1, x).second};
  }
  // Neumann series in terms of J_k from the Miller sequence.
  const int kmax = static_cast<int>(x) + 40 + static_cast<int>(std::sqrt(60.0 * (x + 1.0)));
  const std::vector<double> j = bessel_j_miller(kmax + 1, x);
  const double lg = std::log(0.5 * x) + kEulerGamma;
  double s0 = 0.0;
  double s1 = 0.0;
  for (int k = 1; 2 * k + 1 <= kmax + 1; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    s0 += sign * j[2 * k] / k;
    s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k;
  }
  const double y0 = (2.0 / kPi) * lg * j[0] - (4.0 / kPi) * s0;
  const double y1 = (2.0 / kPi) * lg * j[1] - 2.0 * j[0] / (kPi * x) + (2.0 / kPi) * s1;
  return {y0, y1};
}

double bessel_y_impl(int n, double x) {
  auto [y0, y1] = bessel_y01(x);
  if (n == 0) return y0;
  double prev = y0;
  double cur = y1;
  for (int k = 1; k < n; ++k) {
    const double next = (2.0 * k / x) * cur - prev;
    prev = cur;
    cur = next;
    if (!std::isfinite(cur)) break;
  }
  return checked(cur, "Y_n(x)");
}

double spherical_j_series(int l, double x) {
  // x^l / (2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
  const double log_dfact = std::lgamma(2.0 * l + 2.0) - l * std::log(2.0) - std::lgamma(l + 1.0);
  const double log_pref = (l == 0 ? 0.0 : l * std::log(x)) - log_dfact;
  const double y = -0.5 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= y / (k * (2.0 * l + 2.0 * k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::exp(log_pref) * sum;
}

double spherical_j_impl(int l, double x) {
  if (x == 0.0) return l == 0 ? 1.0 : 0.0;
  if (x <= 1.0 || 0.5 * x * x < 0.1 * (l + 1)) return spherical_j_series(l, x);
  const double top = std::max(static_cast<double>(l), x);
  const int start = static_cast<int>(top) + 30 + static_cast<int>(std::sqrt(60.0 * top));
  double next = 0.0;
  double cur = 1.0e-30;
  double f_l = (l == start) ? cur : 0.0;
  double f1 = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = ((2.0 * k + 1.0) / x) * cur - next;
    next = cur;
    cur = prev;
    if (k - 1 == l) f_l = cur;
    if (std::abs(cur) > kRescaleAbove) {
      cur /= kRescaleAbove;
      next /= kRescaleAbove;
      f_l /= kRescaleAbove;
    }
    if (k - 1 == 0) f1 = next;
  }
  const double f0 = cur;
  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  // Normalize against whichever closed form is farther from a zero.
  if (std::abs(j0) >= std::abs(j1)) return f_l * (j0 / f0);
  return f_l * (j1 / f1);
}

double spherical_y_impl(int l, double x) {
  const double y0 = -std::cos(x) / x;
  if (l == 0) return y0;
  double prev = y0;
  double cur = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int k = 1; k < l; ++k) {
    const double next = ((2.0 * k + 1.0) / x) * cur - prev;
    prev = cur;
    cur = next;
    if (!std::isfinite(cur)) break;
  }
  return checked(cur, "y_l(x)");
}

}  // namespace

double bessel_j(OrderIndex order, double x) {
  check_argument(x, true);
  return bessel_j_impl(order.value(), x);
}

double bessel_y(OrderIndex order, double x) {
  check_argument(x, false);
  return bessel_y_impl(order.value(), x);
}

std::complex<double> hankel1(OrderIndex order, double x) {
  return {bessel_j(order, x), bessel_y(order, x)};
}

double bessel_j_prime(OrderIndex order, double x) {
  check_argument(x, true);
  const int n = order.value();
  if (n == 0) return -bessel_j_impl(1, x);
  return 0.5 * (bessel_j_impl(n - 1, x) - bessel_j_impl(n + 1, x));
}

double bessel_y_prime(OrderIndex order, double x) {
  check_argument(x, false);
  const int n = order.value();
  if (n == 0) return -bessel_y_impl(1, x);
  return checked(0.5 * (bessel_y_impl(n - 1, x) - bessel_y_impl(n + 1, x)), "Y_n'(x)");
}

std::complex<double> hankel1_prime(OrderIndex order, double x) {
  return {bessel_j_prime(order, x), bessel_y_prime(order, x)};
}

double bessel_j_signed(int n, double x) {
  const int m = std::abs(n);
  const double v = bessel_j(m, x);
  return (n < 0 && m % 2 == 1) ? -v : v;
}

double spherical_j(OrderIndex order, double x) {
  check_argument(x, true);
  return spherical_j_impl(order.value(), x);
}

double spherical_y(OrderIndex order, double x) {
  check_argument(x, false);
  return spherical_y_impl(order.value(), x);
}

std::complex<double> spherical_h1(OrderIndex order, double x) {
  return {spherical_j(order, x), spherical_y(order, x)};
}

double spherical_j_prime(OrderIndex order, double x) {
  check_argument(x, true);
  const int l = order.value();
  if (l == 0) return -spherical_j_impl(1, x);
  return (l * spherical_j_impl(l - 1, x) - (l + 1) * spherical_j_impl(l + 1, x)) / (2.0 * l + 1.0);
}

double spherical_y_prime(OrderIndex order, double x) {
  check_argument(x, false);
  const int l = order.value();
  if (l == 0) return -spherical_y_impl(1, x);
  return checked(
      (l * spherical_y_impl(l - 1, x) - (l + 1) * spherical_y_impl(l + 1, x)) / (2.0 * l + 1.0),
      "y_l'(x)");
}

std::complex<double> spherical_h1_prime(OrderIndex order, double x) {
  return {spherical_j_prime(order, x), spherical_y_prime(order, x)};
}

double legendre_p(OrderIndex order, double t) {
  if (!(std::abs(t) <= 1.0)) {
    throw std::domain_error("Legendre argument " + std::to_string(t) + " outside [-1, 1]");
  }
  const int l = order.value();
  if (l == 0) return 1.0;
  double prev = 1.0;
  double cur = t;
  for (int k = 1; k < l; ++k) {
    const double next = ((2.0 * k + 1.0) * t * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace cloak::specfun
