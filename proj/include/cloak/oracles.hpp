#pragma once

// Closed-form reference solutions, independent of the ODE integrator:
// complex-argument Bessel functions by power series, transfer matrices for
// piecewise-constant isotropic media, and homogeneous-ball coefficients.

#include <vector>

#include "cloak/coefficient.hpp"

namespace cloak::oracles {

/// Ascending series; intended for |z| <~ 20.
cplx bessel_j_series(int n, cplx z);
cplx bessel_y_series(int n, cplx z);
cplx spherical_j_series(int l, cplx z);
/// Upward recurrence from the closed forms of y_0 and y_1.
cplx spherical_y_closed(int l, cplx z);

struct ConstantLayer {
  double r_outer = 1.0;
  cplx sigma = 1.0;
  cplx q = 1.0;
  cplx source = 0.0;  // constant source density; innermost layer only
};

/// Regular solution (u, w = sigma r^{N-1} u') at the outermost radius, and for
/// k = 0 with a source a particular solution (u_p, w_p).
struct TransferResult {
  cplx u;
  cplx w;
  bool has_particular = false;
  cplx u_p;
  cplx w_p;
};

/// Piecewise-constant isotropic medium; layers ordered outward from r = 0.
TransferResult transfer_matrix(int dimension, int k, double omega,
                               const std::vector<ConstantLayer>& layers);

/// Outgoing coefficient for a homogeneous ball of radius R with real sigma, q > 0.
cplx mie_coefficient(int dimension, int k, double omega, double radius, double sigma, double q,
                     cplx b);

/// Outgoing coefficient for a sound-hard (Neumann) ball of radius tau.
cplx neumann_coefficient(int dimension, int k, double omega, double tau, cplx b);

}  // namespace cloak::oracles
