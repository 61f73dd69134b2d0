#include "cloak/radial_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "cloak/quadrature.hpp"

namespace cloak::radial {
namespace {

using Vec = std::array<cplx, 2>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

std::string describe(int layer_id, double r) {
  std::ostringstream os;
  os.precision(10);
  os << "layer " << layer_id << " at r = " << r;
  return os.str();
}

cplx scale_by_pow2(cplx z, std::int64_t e) {
  const int ei = static_cast<int>(std::clamp<std::int64_t>(e, -100000, 100000));
  return {std::ldexp(z.real(), ei), std::ldexp(z.imag(), ei)};
}

bool finite(const Vec& y) {
  return std::isfinite(y[0].real()) && std::isfinite(y[0].imag()) && std::isfinite(y[1].real()) &&
         std::isfinite(y[1].imag());
}

double power_n1(double rho, int n) { return n == 2 ? rho : rho * rho; }

// Integrates one layer in the scaled variable rho = r / L, where
//   dv/drho = w / (sigma_r rho^{N-1}),
//   dw/drho = rho^{N-1} (lambda sigma_t / rho^2 - (omega L)^2 q) v + L^2 rho^{N-1} f 2^{-e}.
// Physical flux is L^{N-2} times the scaled flux.
class LayerPropagator {
 public:
  LayerPropagator(const Layer& layer, int layer_id, ModeIndex mode, double omega, double length,
                  bool use_source, const SolverOptions& options)
      : layer_(layer),
        layer_id_(layer_id),
        n_(mode.dimension),
        lambda_(mode.lambda()),
        w2l2_(omega * omega * length * length),
        length_(length),
        use_source_(use_source && layer.source.has_value()),
        options_(options) {}

  void rhs(double rho, const Vec& y, std::int64_t e2, Vec& dy) const {
    const double r = length_ * rho;
    const cplx sr = layer_.profile.sigma_r(r);
    if (sr == cplx(0.0)) {
      throw SolverError("sigma_r vanishes in " + describe(layer_id_, r));
    }
    const double pn = power_n1(rho, n_);
    dy[0] = y[1] / (sr * pn);
    cplx coef = -w2l2_ * layer_.profile.q(r);
    if (lambda_ != 0.0) coef += lambda_ * layer_.profile.sigma_t(r) / (rho * rho);
    dy[1] = pn * coef * y[0];
    if (use_source_) {
      dy[1] += scale_by_pow2(length_ * length_ * pn * (*layer_.source)(r), -e2);
    }
  }

  // Advances (y, e2) from rho_a to rho_b, landing exactly on each stop in (rho_a, rho_b].
  void run(double rho_a, double rho_b, Vec& y, std::int64_t& e2, const std::vector<double>& stops,
           const std::function<void(std::size_t, const Vec&, std::int64_t)>& on_stop,
           std::int64_t& step_counter) const {
    if (!(rho_b > rho_a)) return;
    std::size_t next_stop = 0;
    while (next_stop < stops.size() && stops[next_stop] <= rho_a) {
      on_stop(next_stop, y, e2);
      ++next_stop;
    }
    renormalize(y, e2, nullptr, nullptr);
    std::array<double, 2> peak{std::abs(y[0]), std::abs(y[1])};
    double rho = rho_a;
    double h = (rho_b - rho_a) / 100.0;
    double err_prev = 1e-4;
    bool rejected_last = false;
    std::int64_t attempts = 0;
    Vec k1;
    rhs(rho, y, e2, k1);
    const double tol = options_.rel_tol;

    while (rho < rho_b) {
      const double target = next_stop < stops.size() ? std::min(stops[next_stop], rho_b) : rho_b;
      const double proposed = h;
      double step = h;
      bool lands = false;
      if (rho + step >= target - 1e-14 * std::abs(target)) {
        step = target - rho;
        lands = true;
      }
      if (++attempts > options_.max_steps_per_layer) {
        throw SolverError("step limit exceeded in " + describe(layer_id_, length_ * rho));
      }
      if (step <= 16.0 * std::numeric_limits<double>::epsilon() * std::abs(rho) || step <= 0.0) {
        throw SolverError("step-size underflow in " + describe(layer_id_, length_ * rho));
      }

      Vec k2, k3, k4, k5, k6, k7, tmp, ynew;
      for (int i = 0; i < 2; ++i) tmp[i] = y[i] + step * (a21 * k1[i]);
      rhs(rho + c2 * step, tmp, e2, k2);
      for (int i = 0; i < 2; ++i) tmp[i] = y[i] + step * (a31 * k1[i] + a32 * k2[i]);
      rhs(rho + c3 * step, tmp, e2, k3);
      for (int i = 0; i < 2; ++i) tmp[i] = y[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      rhs(rho + c4 * step, tmp, e2, k4);
      for (int i = 0; i < 2; ++i) {
        tmp[i] = y[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      }
      rhs(rho + c5 * step, tmp, e2, k5);
      for (int i = 0; i < 2; ++i) {
        tmp[i] = y[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                a65 * k5[i]);
      }
      const double rho_new = lands ? target : rho + step;
      rhs(rho_new, tmp, e2, k6);
      for (int i = 0; i < 2; ++i) {
        ynew[i] = y[i] + step * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      }
      rhs(rho_new, ynew, e2, k7);

      double err = 0.0;
      for (int i = 0; i < 2; ++i) {
        const cplx e = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                               e7 * k7[i]);
        double sc = tol * std::max({std::abs(y[i]), std::abs(ynew[i]), peak[i]});
        if (!(sc > 0.0)) sc = std::numeric_limits<double>::min();
        err = std::max(err, std::abs(e) / sc);
      }
      if (!std::isfinite(err)) err = 1e10;

      if (err <= 1.0) {
        ++step_counter;
        rho = rho_new;
        y = ynew;
        k1 = k7;
        if (!finite(y)) {
          throw SolverError("non-finite state in " + describe(layer_id_, length_ * rho));
        }
        renormalize(y, e2, &k1, &peak);
        peak[0] = std::max(peak[0], std::abs(y[0]));
        peak[1] = std::max(peak[1], std::abs(y[1]));
        const double e_safe = std::max(err, 1e-10);
        double fac = 0.9 * std::pow(e_safe, -0.17) * std::pow(err_prev, 0.04);
        fac = std::clamp(fac, 0.2, 10.0);
        if (rejected_last) fac = std::min(fac, 1.0);
        // A step shortened to land on a stop keeps the previous proposal.
        h = (lands && step < proposed) ? proposed : step * fac;
        err_prev = e_safe;
        rejected_last = false;
        if (lands && next_stop < stops.size() && stops[next_stop] <= rho) {
          on_stop(next_stop, y, e2);
          ++next_stop;
        }
      } else {
        h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
        rejected_last = true;
      }
    }
    while (next_stop < stops.size()) {
      on_stop(next_stop, y, e2);
      ++next_stop;
    }
  }

 private:
  void renormalize(Vec& y, std::int64_t& e2, Vec* k, std::array<double, 2>* peak) const {
    const double m = std::max(std::abs(y[0]), std::abs(y[1]));
    if (!(m > options_.renorm_upper || (m < options_.renorm_lower && m > 0.0))) return;
    const int d = std::ilogb(m);
    for (auto& v : y) v = scale_by_pow2(v, -d);
    if (k) {
      for (auto& v : *k) v = scale_by_pow2(v, -d);
    }
    if (peak) {
      for (auto& p : *peak) p = std::ldexp(p, -d);
    }
    e2 += d;
  }

  const Layer& layer_;
  int layer_id_;
  int n_;
  double lambda_;
  double w2l2_;
  double length_;
  bool use_source_;
  const SolverOptions& options_;
};

double flux_scale(double length, int n) { return n == 2 ? 1.0 : length; }

void check_options(const SolverOptions& options) {
  if (!(options.rel_tol > 0.0 && options.rel_tol < 1.0)) {
    throw std::invalid_argument("rel_tol must lie in (0, 1)");
  }
  if (!(options.renorm_upper > 1.0 && options.renorm_lower < 1.0 && options.renorm_lower > 0.0)) {
    throw std::invalid_argument("renormalization thresholds must bracket 1");
  }
  if (!(options.seed_fraction > 0.0 && options.seed_fraction < 1.0)) {
    throw std::invalid_argument("seed_fraction must lie in (0, 1)");
  }
}

}  // namespace

ModeIndex ModeIndex::make(int dimension, int k) {
  if (dimension != 2 && dimension != 3) throw std::invalid_argument("dimension must be 2 or 3");
  if (k < 0) throw std::invalid_argument("mode index must be nonnegative");
  return ModeIndex{dimension, k};
}

double SolverState::scale_log() const { return static_cast<double>(scale_exp2) * std::log(2.0); }

std::pair<cplx, cplx> ode_rhs(const Layer& layer, ModeIndex mode, double omega,
                              const SolverState& state) {
  LayerPropagator prop(layer, 0, mode, omega, 1.0, mode.k == 0, SolverOptions{});
  Vec dy;
  prop.rhs(state.r, Vec{state.u, state.w}, state.scale_exp2, dy);
  return {dy[0], dy[1]};
}

cplx indicial_exponent(const Layer& innermost, ModeIndex mode) {
  const cplx sr = innermost.profile.sigma_r(0.0);
  const cplx st = innermost.profile.sigma_t(0.0);
  if (!(sr.real() > 0.0)) {
    throw SolverError("regular seed needs Re sigma_r(0) > 0");
  }
  const double nm2 = mode.dimension - 2.0;
  return 0.5 * (-nm2 + std::sqrt(cplx(nm2 * nm2) + 4.0 * mode.lambda() * st / sr));
}

SolverState regular_seed(const Layer& innermost, ModeIndex mode, double r0) {
  if (!(r0 > 0.0)) throw std::invalid_argument("seed radius must be positive");
  const cplx m = indicial_exponent(innermost, mode);
  // r0^m = 2^e * exp(m ln r0 - e ln 2), keeping the carried mantissa near 1.
  const double log_r0 = std::log(r0);
  const auto e = static_cast<std::int64_t>(std::llround(m.real() * log_r0 / std::log(2.0)));
  const cplx u = std::exp(m * log_r0 - static_cast<double>(e) * std::log(2.0));
  SolverState s;
  s.r = r0;
  s.u = u;
  s.w = innermost.profile.sigma_r(r0) * m * std::pow(r0, mode.dimension - 2.0) * u;
  s.scale_exp2 = e;
  return s;
}

SolverState integrate_layer(const SolverState& start, const Layer& layer, ModeIndex mode,
                            double omega, const SolverOptions& options) {
  check_options(options);
  SolverState out = start;
  if (!(layer.r_outer > start.r)) {
    out.r = std::max(start.r, layer.r_outer);
    return out;
  }
  const double length = layer.r_outer;
  const double fs = flux_scale(length, mode.dimension);
  LayerPropagator prop(layer, 0, mode, omega, length, mode.k == 0, options);
  Vec y{start.u, start.w / fs};
  std::int64_t e2 = start.scale_exp2;
  std::int64_t steps = 0;
  prop.run(start.r / length, 1.0, y, e2, {}, [](std::size_t, const Vec&, std::int64_t) {}, steps);
  out.r = layer.r_outer;
  out.u = y[0];
  out.w = y[1] * fs;
  out.scale_exp2 = e2;
  return out;
}

RobinData interior_response(const LayeredMedium& medium, ModeIndex mode, double omega,
                            const SolverOptions& options) {
  check_options(options);
  if (mode.dimension != medium.dimension()) {
    throw std::invalid_argument("mode dimension does not match the medium");
  }
  const auto& layers = medium.layers();
  const double length = medium.r_ext();
  const double fs = flux_scale(length, mode.dimension);
  const double r0 = options.seed_fraction * layers.front().r_outer;

  RobinData out;
  out.r_ext = length;
  const bool want_dense = options.dense_nodes > 0;
  const QuadratureRule* rule = want_dense ? &gauss_legendre(options.dense_nodes) : nullptr;

  std::vector<std::vector<double>> stops(layers.size());
  if (want_dense) {
    out.dense.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const double lo = layers[i].r_inner;
      const double hi = layers[i].r_outer;
      auto& d = out.dense[i];
      const std::size_t n = rule->nodes.size();
      d.r.resize(n);
      d.weight.resize(n);
      d.u_h.assign(n, 0.0);
      d.w_h.assign(n, 0.0);
      d.u_p.assign(n, 0.0);
      d.w_p.assign(n, 0.0);
      stops[i].resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        d.r[j] = lo + 0.5 * (hi - lo) * (rule->nodes[j] + 1.0);
        d.weight[j] = 0.5 * (hi - lo) * rule->weights[j];
        stops[i][j] = d.r[j] / length;
      }
    }
  }

  // Homogeneous regular solution.
  const SolverState seed = regular_seed(layers.front(), mode, r0);
  Vec y{seed.u, seed.w / fs};
  std::int64_t e2 = seed.scale_exp2;
  std::vector<std::vector<std::int64_t>> node_exp(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const double rho_a = i == 0 ? r0 / length : layers[i].r_inner / length;
    const double rho_b = layers[i].r_outer / length;
    LayerPropagator prop(layers[i], static_cast<int>(i), mode, omega, length, false, options);
    if (want_dense) node_exp[i].assign(stops[i].size(), 0);
    auto record = [&](std::size_t j, const Vec& v, std::int64_t e) {
      if (!want_dense) return;
      out.dense[i].u_h[j] = v[0];
      out.dense[i].w_h[j] = v[1] * fs;
      node_exp[i][j] = e;
    };
    prop.run(rho_a, rho_b, y, e2, stops[i], record, out.steps);
  }
  out.u_val = y[0];
  out.flux_val = y[1] * fs;
  out.scale_exp2 = e2;
  if (want_dense) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      for (std::size_t j = 0; j < stops[i].size(); ++j) {
        out.dense[i].u_h[j] = scale_by_pow2(out.dense[i].u_h[j], node_exp[i][j] - e2);
        out.dense[i].w_h[j] = scale_by_pow2(out.dense[i].w_h[j], node_exp[i][j] - e2);
      }
    }
  }

  // Particular solution from zero data; a radial source only drives mode 0.
  if (medium.has_source()) {
    out.has_particular = true;
    if (mode.k == 0) {
      Vec yp{cplx(0.0), cplx(0.0)};
      std::int64_t ep = 0;
      for (std::size_t i = 0; i < layers.size(); ++i) {
        const double rho_a = i == 0 ? r0 / length : layers[i].r_inner / length;
        const double rho_b = layers[i].r_outer / length;
        LayerPropagator prop(layers[i], static_cast<int>(i), mode, omega, length, true, options);
        auto record = [&](std::size_t j, const Vec& v, std::int64_t e) {
          if (!want_dense) return;
          out.dense[i].u_p[j] = scale_by_pow2(v[0], e);
          out.dense[i].w_p[j] = scale_by_pow2(v[1] * fs, e);
        };
        prop.run(rho_a, rho_b, yp, ep, stops[i], record, out.steps);
      }
      out.u_p = scale_by_pow2(yp[0], ep);
      out.w_p = scale_by_pow2(yp[1] * fs, ep);
    }
  }

  const bool ok = std::isfinite(std::abs(out.u_val)) && std::isfinite(std::abs(out.flux_val)) &&
                  std::isfinite(std::abs(out.u_p)) && std::isfinite(std::abs(out.w_p));
  if (!ok) throw SolverError("interior response is not finite");
  return out;
}

}  // namespace cloak::radial
