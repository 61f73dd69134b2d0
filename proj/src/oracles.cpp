#include "cloak/oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "cloak/specfun.hpp"

namespace cloak::oracles {
namespace {

constexpr double kPi = std::numbers::pi;

double harmonic(int m) {
  double h = 0.0;
  for (int i = 1; i <= m; ++i) h += 1.0 / i;
  return h;
}

// Regular/irregular pair of the layer equation and their r-derivatives.
struct LayerBasis {
  cplx z1, z2, dz1, dz2;
};

LayerBasis layer_basis(int dimension, int k, cplx kappa, double r) {
  LayerBasis b;
  if (kappa == cplx(0.0)) {
    if (dimension == 2) {
      if (k == 0) {
        b = {1.0, std::log(r), 0.0, 1.0 / r};
      } else {
        b = {std::pow(r, k), std::pow(r, -k), double(k) * std::pow(r, k - 1),
             -double(k) * std::pow(r, -k - 1)};
      }
    } else {
      b = {std::pow(r, k), std::pow(r, -k - 1), double(k) * std::pow(r, k - 1),
           -(k + 1.0) * std::pow(r, -k - 2)};
    }
    return b;
  }
  const cplx z = kappa * r;
  if (dimension == 2) {
    const cplx jp = k == 0 ? -bessel_j_series(1, z)
                           : 0.5 * (bessel_j_series(k - 1, z) - bessel_j_series(k + 1, z));
    const cplx yp = k == 0 ? -bessel_y_series(1, z)
                           : 0.5 * (bessel_y_series(k - 1, z) - bessel_y_series(k + 1, z));
    b = {bessel_j_series(k, z), bessel_y_series(k, z), kappa * jp, kappa * yp};
  } else {
    const double l = k;
    const cplx jp = k == 0 ? -spherical_j_series(1, z)
                           : (l * spherical_j_series(k - 1, z) - (l + 1) * spherical_j_series(k + 1, z)) /
                                 (2 * l + 1);
    const cplx yp = k == 0 ? -spherical_y_closed(1, z)
                           : (l * spherical_y_closed(k - 1, z) - (l + 1) * spherical_y_closed(k + 1, z)) /
                                 (2 * l + 1);
    b = {spherical_j_series(k, z), spherical_y_closed(k, z), kappa * jp, kappa * yp};
  }
  return b;
}

struct Real {
  double j, jp;
  cplx h, hp;
};

Real real_basis(int dimension, int k, double x) {
  if (dimension == 2) {
    return {specfun::bessel_j(k, x), specfun::bessel_j_prime(k, x), specfun::hankel1(k, x),
            specfun::hankel1_prime(k, x)};
  }
  return {specfun::spherical_j(k, x), specfun::spherical_j_prime(k, x), specfun::spherical_h1(k, x),
          specfun::spherical_h1_prime(k, x)};
}

}  // namespace

cplx bessel_j_series(int n, cplx z) {
  if (n < 0) throw std::invalid_argument("order must be nonnegative");
  cplx term = 1.0;
  for (int i = 1; i <= n; ++i) term *= 0.5 * z / double(i);
  const cplx y = -0.25 * z * z;
  cplx sum = term;
  for (int k = 1; k < 1000; ++k) {
    term *= y / (double(k) * (n + k));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum) && k > std::abs(z)) break;
  }
  return sum;
}

cplx bessel_y_series(int n, cplx z) {
  if (n < 0) throw std::invalid_argument("order must be nonnegative");
  if (z == cplx(0.0)) throw std::domain_error("Y_n is singular at the origin");
  const cplx half = 0.5 * z;
  cplx result = (2.0 / kPi) * bessel_j_series(n, z) * std::log(half);
  // Finite part: sum_{k<n} (n-k-1)!/k! (z/2)^{2k-n}
  if (n > 0) {
    cplx finite = 0.0;
    for (int k = 0; k < n; ++k) {
      finite += std::exp(std::lgamma(double(n - k)) - std::lgamma(k + 1.0)) *
                std::pow(half, 2 * k - n);
    }
    result -= finite / kPi;
  }
  cplx pref = 1.0;
  for (int i = 1; i <= n; ++i) pref *= half / double(i);
  const double gamma = std::numbers::egamma;
  const cplx y = -half * half;
  cplx term = pref;  // (z/2)^n / (k! (n+k)!) * (-z^2/4)^k
  cplx sum = (-2.0 * gamma + harmonic(0) + harmonic(n)) * term;
  for (int k = 1; k < 1000; ++k) {
    term *= y / (double(k) * (n + k));
    const double psi = -2.0 * gamma + harmonic(k) + harmonic(n + k);
    const cplx add = psi * term;
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum) && k > std::abs(z)) break;
  }
  result -= sum / kPi;
  return result;
}

cplx spherical_j_series(int l, cplx z) {
  if (l < 0) throw std::invalid_argument("order must be nonnegative");
  cplx term = 1.0;
  for (int i = 1; i <= l; ++i) term *= z / (2.0 * i + 1.0);
  const cplx y = -0.5 * z * z;
  cplx sum = term;
  for (int k = 1; k < 1000; ++k) {
    term *= y / (double(k) * (2.0 * l + 2.0 * k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum) && k > std::abs(z)) break;
  }
  return sum;
}

cplx spherical_y_closed(int l, cplx z) {
  if (l < 0) throw std::invalid_argument("order must be nonnegative");
  if (z == cplx(0.0)) throw std::domain_error("y_l is singular at the origin");
  cplx prev = -std::cos(z) / z;
  if (l == 0) return prev;
  cplx cur = -std::cos(z) / (z * z) - std::sin(z) / z;
  for (int k = 1; k < l; ++k) {
    const cplx next = ((2.0 * k + 1.0) / z) * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

TransferResult transfer_matrix(int dimension, int k, double omega,
                               const std::vector<ConstantLayer>& layers) {
  if (layers.empty()) throw std::invalid_argument("transfer matrix needs at least one layer");
  auto area = [dimension](double r) { return dimension == 2 ? r : r * r; };
  auto kappa_of = [omega](const ConstantLayer& l) { return omega * std::sqrt(l.q / l.sigma); };

  TransferResult out;
  // Regular solution in the innermost layer.
  cplx kappa = kappa_of(layers[0]);
  double r = layers[0].r_outer;
  LayerBasis bas = layer_basis(dimension, k, kappa, r);
  out.u = bas.z1;
  out.w = layers[0].sigma * area(r) * bas.dz1;

  const bool particular = k == 0 && layers[0].source != cplx(0.0);
  if (particular) {
    out.has_particular = true;
    const ConstantLayer& c = layers[0];
    if (c.q != cplx(0.0)) {
      out.u_p = c.source / (omega * omega * c.q);
      out.w_p = 0.0;
    } else {
      out.u_p = c.source * r * r / (2.0 * dimension * c.sigma);
      out.w_p = c.source * std::pow(r, dimension) / double(dimension);
    }
  }
  for (std::size_t i = 1; i < layers.size(); ++i) {
    if (layers[i].source != cplx(0.0)) {
      throw std::invalid_argument("transfer oracle supports a source in the innermost layer only");
    }
    const double r_in = layers[i - 1].r_outer;
    const double r_out = layers[i].r_outer;
    kappa = kappa_of(layers[i]);
    const cplx s = layers[i].sigma;
    auto propagate = [&](cplx u, cplx w) {
      const LayerBasis in = layer_basis(dimension, k, kappa, r_in);
      const cplx m11 = in.z1, m12 = in.z2;
      const cplx m21 = s * area(r_in) * in.dz1, m22 = s * area(r_in) * in.dz2;
      const cplx det = m11 * m22 - m12 * m21;
      const cplx a = (u * m22 - m12 * w) / det;
      const cplx b = (m11 * w - m21 * u) / det;
      const LayerBasis ob = layer_basis(dimension, k, kappa, r_out);
      return std::pair<cplx, cplx>{a * ob.z1 + b * ob.z2,
                                   s * area(r_out) * (a * ob.dz1 + b * ob.dz2)};
    };
    std::tie(out.u, out.w) = propagate(out.u, out.w);
    if (particular) std::tie(out.u_p, out.w_p) = propagate(out.u_p, out.w_p);
  }
  return out;
}

cplx mie_coefficient(int dimension, int k, double omega, double radius, double sigma, double q,
                     cplx b) {
  if (!(sigma > 0.0 && q > 0.0)) throw std::invalid_argument("Mie oracle needs sigma, q > 0");
  const double kappa = omega * std::sqrt(q / sigma);
  const Real in = real_basis(dimension, k, kappa * radius);
  const Real ex = real_basis(dimension, k, omega * radius);
  return b * (omega * in.j * ex.jp - sigma * kappa * in.jp * ex.j) /
         (sigma * kappa * in.jp * ex.h - omega * in.j * ex.hp);
}

cplx neumann_coefficient(int dimension, int k, double omega, double tau, cplx b) {
  const Real ex = real_basis(dimension, k, omega * tau);
  return -b * ex.jp / ex.hp;
}

}  // namespace cloak::oracles
