#pragma once

// Real-argument Bessel, Hankel and Legendre functions.
//
// Cylindrical functions J_n, Y_n, H_n^(1) and spherical functions j_l, y_l,
// h_l^(1) of integer order 0..200 and argument 0..1e4, with first
// derivatives. Everything here is a pure function of its arguments.

#include <complex>
#include <stdexcept>
#include <string>

namespace cloak::specfun {

inline constexpr int kMaxOrder = 200;
inline constexpr double kMaxArgument = 1.0e4;

/// Nonnegative angular order, range-checked against kMaxOrder on construction.
class OrderIndex {
 public:
  // Implicit so call sites can write bessel_j(3, x).
  OrderIndex(int value) : value_(value) {  // NOLINT(google-explicit-constructor)
    if (value < 0 || value > kMaxOrder) {
      throw std::out_of_range("order " + std::to_string(value) + " outside supported range [0, " +
                              std::to_string(kMaxOrder) + "]");
    }
  }
  int value() const { return value_; }

 private:
  int value_;
};

double bessel_j(OrderIndex order, double x);
double bessel_y(OrderIndex order, double x);
std::complex<double> hankel1(OrderIndex order, double x);

double bessel_j_prime(OrderIndex order, double x);
double bessel_y_prime(OrderIndex order, double x);
std::complex<double> hankel1_prime(OrderIndex order, double x);

/// J_n for signed n, via J_{-n} = (-1)^n J_n.
double bessel_j_signed(int n, double x);

double spherical_j(OrderIndex order, double x);
double spherical_y(OrderIndex order, double x);
std::complex<double> spherical_h1(OrderIndex order, double x);

double spherical_j_prime(OrderIndex order, double x);
double spherical_y_prime(OrderIndex order, double x);
std::complex<double> spherical_h1_prime(OrderIndex order, double x);

/// Legendre polynomial P_l(t), |t| <= 1.
double legendre_p(OrderIndex order, double t);

}  // namespace cloak::specfun
