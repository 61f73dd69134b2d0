#include "cloak/materials.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace cloak::materials {
namespace {

constexpr cplx kI{0.0, 1.0};

bool is_exactly_one(const RadialFn& fn) {
  return fn.constant_value().has_value() && *fn.constant_value() == cplx(1.0, 0.0);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Evaluates fn on a uniform grid over [lo, hi]; table range errors become SpecError.
std::vector<cplx> sample(const CoefficientFn& fn, double lo, double hi, const std::string& name) {
  std::vector<cplx> values(kValidationSamples);
  for (int j = 0; j < kValidationSamples; ++j) {
    const double r = (j + 1 == kValidationSamples)
                         ? hi
                         : lo + (hi - lo) * static_cast<double>(j) / (kValidationSamples - 1);
    try {
      values[j] = fn(r);
    } catch (const std::domain_error& e) {
      throw SpecError(name + " must be defined on [" + fmt(lo) + ", " + fmt(hi) + "]: " + e.what());
    }
    if (!std::isfinite(values[j].real()) || !std::isfinite(values[j].imag())) {
      throw SpecError(name + " is not finite at r = " + fmt(r));
    }
  }
  return values;
}

void require_positive_real_part(const CoefficientFn& fn, double lo, double hi,
                                const std::string& name) {
  const auto values = sample(fn, lo, hi, name);
  for (int j = 0; j < kValidationSamples; ++j) {
    if (!(values[j].real() > 0.0)) {
      throw SpecError(name + " must have positive real part on [" + fmt(lo) + ", " + fmt(hi) +
                      "] (got " + fmt(values[j].real()) + ")");
    }
  }
}

void require_real(const std::vector<cplx>& values, const std::string& name) {
  for (const cplx& v : values) {
    if (v.imag() != 0.0) throw SpecError(name + " must be real-valued");
  }
}

RadialFn combine_modulus(const CoefficientFn& alpha, const CoefficientFn& beta, double scale) {
  if (alpha.is_constant() && beta.is_constant()) {
    return RadialFn::constant(scale * (alpha(0.0) + kI * beta(0.0)));
  }
  return RadialFn::wrap([alpha, beta, scale](double r) { return scale * (alpha(r) + kI * beta(r)); });
}

}  // namespace

bool AnisotropicProfile::is_vacuum() const {
  return is_exactly_one(sigma_r) && is_exactly_one(sigma_t) && is_exactly_one(q);
}

LayeredMedium::LayeredMedium(int dimension, std::vector<Layer> layers)
    : dimension_(dimension), layers_(std::move(layers)) {
  if (dimension_ != 2 && dimension_ != 3) {
    throw SpecError("dimension must be 2 or 3 (got " + std::to_string(dimension_) + ")");
  }
  if (layers_.empty()) throw SpecError("medium needs at least one layer");
  if (layers_.front().r_inner != 0.0) throw SpecError("first layer must start at r = 0");
  bool source_run_open = true;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    if (!(layer.r_outer > layer.r_inner) || !std::isfinite(layer.r_outer)) {
      throw SpecError("layer " + std::to_string(i) + " has r_outer <= r_inner");
    }
    if (i > 0 && layer.r_inner != layers_[i - 1].r_outer) {
      throw SpecError("layer " + std::to_string(i) + " does not start where layer " +
                      std::to_string(i - 1) + " ends");
    }
    if (layer.source) {
      if (!source_run_open) {
        throw SpecError("source in layer " + std::to_string(i) +
                        " is outside the innermost region");
      }
    } else {
      source_run_open = false;
    }
  }
}

bool LayeredMedium::has_source() const {
  return std::any_of(layers_.begin(), layers_.end(), [](const Layer& l) { return l.source; });
}

double LayeredMedium::matching_radius() const {
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    if (!it->is_vacuum()) return it->r_outer;
  }
  return 0.0;
}

LayeredMedium LayeredMedium::trimmed() const {
  const double rm = matching_radius();
  if (rm == 0.0) return *this;
  std::vector<Layer> kept;
  for (const Layer& layer : layers_) {
    if (layer.r_inner >= rm) break;
    kept.push_back(layer);
  }
  return LayeredMedium(dimension_, std::move(kept));
}

LayeredMedium LayeredMedium::extended_to(double r) const {
  if (r <= r_ext()) return *this;
  auto layers = layers_;
  layers.push_back(Layer{r_ext(), r, AnisotropicProfile::vacuum(), std::nullopt});
  return LayeredMedium(dimension_, std::move(layers));
}

LayeredMedium LayeredMedium::split_at(double r) const {
  std::vector<Layer> layers;
  for (const Layer& layer : layers_) {
    if (r > layer.r_inner && r < layer.r_outer) {
      Layer lo = layer;
      Layer hi = layer;
      lo.r_outer = r;
      hi.r_inner = r;
      layers.push_back(lo);
      layers.push_back(hi);
    } else {
      layers.push_back(layer);
    }
  }
  return LayeredMedium(dimension_, std::move(layers));
}

RadialMap RadialMap::between(double t_lo, double t_hi, double s_lo, double s_hi) {
  if (!(t_hi > t_lo) || !(s_hi > s_lo)) {
    throw SpecError("radial map needs increasing, nondegenerate intervals");
  }
  RadialMap m;
  m.t_lo_ = t_lo;
  m.t_hi_ = t_hi;
  m.s_lo_ = s_lo;
  m.s_hi_ = s_hi;
  m.b_ = (s_hi - s_lo) / (t_hi - t_lo);
  m.a_ = (t_lo == 0.0) ? s_lo : s_lo - m.b_ * t_lo;
  return m;
}

double RadialMap::operator()(double t) const {
  if (t == t_lo_) return s_lo_;
  if (t == t_hi_) return s_hi_;
  return a_ + b_ * t;
}

double RadialMap::inverse(double s) const {
  if (s == s_lo_) return t_lo_;
  if (s == s_hi_) return t_hi_;
  return (s - a_) / b_;
}

RadialMap RadialMap::compose(const RadialMap& inner) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(t_hi_));
  if (std::abs(inner.s_lo_ - t_lo_) > tol || std::abs(inner.s_hi_ - t_hi_) > tol) {
    throw SpecError("composed radial maps do not chain (codomain != domain)");
  }
  RadialMap m;
  m.t_lo_ = inner.t_lo_;
  m.t_hi_ = inner.t_hi_;
  m.s_lo_ = s_lo_;
  m.s_hi_ = s_hi_;
  m.b_ = b_ * inner.b_;
  m.a_ = a_ + b_ * inner.a_;
  return m;
}

PiecewiseRadialMap::PiecewiseRadialMap(std::vector<RadialMap> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw SpecError("piecewise radial map needs at least one piece");
  if (pieces_.front().t_lo() != 0.0 || pieces_.front().s_lo() != 0.0) {
    throw SpecError("piecewise radial map must fix the origin");
  }
  for (std::size_t i = 1; i < pieces_.size(); ++i) {
    if (pieces_[i].t_lo() != pieces_[i - 1].t_hi() || pieces_[i].s_lo() != pieces_[i - 1].s_hi()) {
      throw SpecError("piecewise radial map pieces are not contiguous at piece " +
                      std::to_string(i));
    }
  }
}

double PiecewiseRadialMap::operator()(double t) const {
  for (const RadialMap& piece : pieces_) {
    if (t <= piece.t_hi()) return piece(t);
  }
  throw std::domain_error("radius " + fmt(t) + " outside the map domain");
}

RadialMap blowup_map(double epsilon, double rho_cloaked, double rho_outer) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw SpecError("epsilon must lie in (0, 1) (got " + fmt(epsilon) + ")");
  }
  if (!(epsilon < rho_cloaked && rho_cloaked < rho_outer)) {
    throw SpecError("blow-up map needs epsilon < rho_cloaked < rho_outer");
  }
  return RadialMap::between(epsilon, rho_outer, rho_cloaked, rho_outer);
}

PiecewiseRadialMap full_blowup_map(double epsilon, double rho_cloaked, double rho_outer) {
  RadialMap outer = blowup_map(epsilon, rho_cloaked, rho_outer);
  return PiecewiseRadialMap({RadialMap::between(0.0, epsilon, 0.0, rho_cloaked), outer});
}

AnisotropicProfile push_forward_radial(const RadialMap& map, const AnisotropicProfile& profile,
                                       int dimension) {
  const int n = dimension;
  const double b = map.b();
  if (map.a() == 0.0) {
    // Pure dilation: every Jacobian factor is constant.
    const double det = std::pow(b, n);
    return {profile.sigma_r.stretched(b).times(b * b / det),
            profile.sigma_t.stretched(b).times(b * b / det),
            profile.q.stretched(b).times(1.0 / det)};
  }
  const double slack = 1e-12 * std::max(1.0, map.s_hi());
  auto locate = [map, slack](double s) {
    if (s < map.s_lo() - slack || s > map.s_hi() + slack) {
      throw std::domain_error("push-forward evaluated at r = " + fmt(s) + " outside [" +
                              fmt(map.s_lo()) + ", " + fmt(map.s_hi()) + "]");
    }
    const double t = map.inverse(s);
    const double stretch = s / t;  // tangential eigenvalue f(t)/t
    return std::pair<double, double>{t, stretch};
  };
  auto sr = profile.sigma_r;
  auto st = profile.sigma_t;
  auto q = profile.q;
  AnisotropicProfile out;
  out.sigma_r = RadialFn::wrap([=](double s) {
    auto [t, k] = locate(s);
    return sr(t) * (b / std::pow(k, n - 1));
  });
  out.sigma_t = RadialFn::wrap([=](double s) {
    auto [t, k] = locate(s);
    return st(t) * (std::pow(k, 3 - n) / b);
  });
  out.q = RadialFn::wrap([=](double s) {
    auto [t, k] = locate(s);
    return q(t) / (b * std::pow(k, n - 1));
  });
  return out;
}

RadialFn push_forward_source(const RadialMap& map, const RadialFn& source, int dimension) {
  const int n = dimension;
  const double b = map.b();
  if (map.a() == 0.0) return source.stretched(b).times(1.0 / std::pow(b, n));
  return RadialFn::wrap([map, source, n, b](double s) {
    const double t = map.inverse(s);
    return source(t) / (b * std::pow(s / t, n - 1));
  });
}

LayeredMedium push_forward_medium(const PiecewiseRadialMap& map, const LayeredMedium& medium) {
  const double end = map.domain_end();
  if (std::abs(end - medium.r_ext()) > 1e-12 * std::max(1.0, end)) {
    throw SpecError("map domain [0, " + fmt(end) + "] does not match the medium extent " +
                    fmt(medium.r_ext()));
  }
  const int n = medium.dimension();
  std::vector<Layer> out;
  for (std::size_t p = 0; p < map.pieces().size(); ++p) {
    const RadialMap& piece = map.pieces()[p];
    const bool last_piece = p + 1 == map.pieces().size();
    for (const Layer& layer : medium.layers()) {
      const double lo = std::max(layer.r_inner, piece.t_lo());
      const double hi = last_piece ? layer.r_outer : std::min(layer.r_outer, piece.t_hi());
      if (!(hi > lo)) continue;
      Layer mapped;
      mapped.r_inner = piece(lo);
      mapped.r_outer = last_piece && hi == medium.r_ext() ? piece.s_hi() : piece(hi);
      mapped.profile = push_forward_radial(piece, layer.profile, n);
      if (layer.source) mapped.source = push_forward_source(piece, *layer.source, n);
      out.push_back(std::move(mapped));
    }
  }
  return LayeredMedium(n, std::move(out));
}

double min_r_exponent(int dimension) { return 2.0 - 0.5 * dimension; }

SpecBounds validate(const CloakSpec& spec) {
  const int n = spec.dimension;
  if (n != 2 && n != 3) throw SpecError("N must be 2 or 3 (got " + std::to_string(n) + ")");
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) {
    throw SpecError("epsilon must lie in (0, 1) (got " + fmt(spec.epsilon) + ")");
  }
  if (!(spec.omega > 0.0) || !std::isfinite(spec.omega)) {
    throw SpecError("omega must be positive (got " + fmt(spec.omega) + ")");
  }
  const double r_min = min_r_exponent(n);
  if (!(spec.r_exponent > r_min) || !std::isfinite(spec.r_exponent)) {
    throw SpecError("r must exceed 2 - N/2 = " + fmt(r_min) + " (got " + fmt(spec.r_exponent) +
                    ")");
  }

  SpecBounds bounds;
  const double core_end = spec.lossy_enabled ? kCoreRadius : kCloakedRadius;
  require_positive_real_part(spec.core.sigma_r, 0.0, core_end, "core.sigma_r");
  require_positive_real_part(spec.core.sigma_t, 0.0, core_end, "core.sigma_t");
  const auto core_q = sample(spec.core.q, 0.0, core_end, "core.q");
  for (const cplx& v : core_q) {
    if (v.imag() < 0.0) throw SpecError("core.q must have Im q >= 0 (got " + fmt(v.imag()) + ")");
  }

  if (spec.lossy_enabled) {
    require_positive_real_part(spec.lossy.gamma, kCoreRadius, kCloakedRadius, "lossy.gamma");
    require_positive_real_part(spec.lossy.g, kCoreRadius, kCloakedRadius, "lossy.g");
    const auto alpha = sample(spec.lossy.alpha, kCoreRadius, kCloakedRadius, "lossy.alpha");
    const auto beta = sample(spec.lossy.beta, kCoreRadius, kCloakedRadius, "lossy.beta");
    require_real(alpha, "lossy.alpha");
    require_real(beta, "lossy.beta");
    auto re = [](const cplx& v) { return v.real(); };
    std::vector<double> a(alpha.size());
    std::vector<double> b(beta.size());
    std::transform(alpha.begin(), alpha.end(), a.begin(), re);
    std::transform(beta.begin(), beta.end(), b.begin(), re);
    bounds.alpha_max = *std::max_element(a.begin(), a.end());
    bounds.beta_min = *std::min_element(b.begin(), b.end());
    bounds.beta_max = *std::max_element(b.begin(), b.end());
    if (!(bounds.beta_min > 0.0)) {
      throw SpecError("lossy.beta must be bounded below by a positive constant (min sampled "
                      "value " + fmt(bounds.beta_min) + ")");
    }
  }

  if (spec.source) {
    const auto f = sample(*spec.source, 0.0, kCoreRadius, "source");
    const auto q_on_core = sample(spec.core.q, 0.0, kCoreRadius, "core.q");
    double floor = std::numeric_limits<double>::infinity();
    bool nonzero = false;
    for (int j = 0; j < kValidationSamples; ++j) {
      if (f[j] == cplx(0.0)) continue;
      nonzero = true;
      floor = std::min(floor, q_on_core[j].imag());
    }
    if (nonzero) {
      if (spec.absorption_floor) {
        if (!(*spec.absorption_floor > 0.0)) {
          throw SpecError("absorption_floor q0 must be positive (got " +
                          fmt(*spec.absorption_floor) + ")");
        }
        if (!spec.allow_buster && floor < *spec.absorption_floor) {
          throw SpecError("Im q_a = " + fmt(floor) + " falls below absorption_floor q0 = " +
                          fmt(*spec.absorption_floor) +
                          " on the source support; set allow_buster to override");
        }
        bounds.absorption_floor = *spec.absorption_floor;
      } else {
        if (!spec.allow_buster && !(floor > 0.0)) {
          throw SpecError("an active source needs Im q_a >= q0 > 0 on its support (min Im q_a = " +
                          fmt(floor) + "); set allow_buster to override");
        }
        bounds.absorption_floor = floor;
      }
    }
  } else if (spec.absorption_floor && !(*spec.absorption_floor > 0.0)) {
    throw SpecError("absorption_floor q0 must be positive (got " + fmt(*spec.absorption_floor) +
                    ")");
  }
  return bounds;
}

Layer lossy_layer_physical(const CloakSpec& spec) {
  const int n = spec.dimension;
  const double eps = spec.epsilon;
  const double sigma_scale = std::pow(eps, n + spec.r_exponent - 2.0);
  Layer layer;
  layer.r_inner = kCoreRadius;
  layer.r_outer = kCloakedRadius;
  layer.profile.sigma_r = RadialFn(spec.lossy.gamma).times(sigma_scale);
  layer.profile.sigma_t = RadialFn(spec.lossy.g).times(sigma_scale);
  layer.profile.q = combine_modulus(spec.lossy.alpha, spec.lossy.beta, std::pow(eps, n));
  return layer;
}

LayeredMedium assemble_physical(const CloakSpec& spec) {
  validate(spec);
  const int n = spec.dimension;
  const AnisotropicProfile core{spec.core.sigma_r, spec.core.sigma_t, spec.core.q};
  std::vector<Layer> layers;
  Layer inner{0.0, kCoreRadius, core, std::nullopt};
  if (spec.source) inner.source = RadialFn(*spec.source);
  layers.push_back(inner);
  if (spec.lossy_enabled) {
    layers.push_back(lossy_layer_physical(spec));
  } else {
    layers.push_back(Layer{kCoreRadius, kCloakedRadius, core, std::nullopt});
  }
  const RadialMap shell_map = blowup_map(spec.epsilon, kCloakedRadius, kOuterRadius);
  layers.push_back(Layer{kCloakedRadius, kOuterRadius,
                         push_forward_radial(shell_map, AnisotropicProfile::vacuum(), n),
                         std::nullopt});
  return LayeredMedium(n, std::move(layers));
}

LayeredMedium assemble_virtual(const CloakSpec& spec) {
  validate(spec);
  const int n = spec.dimension;
  const double eps = spec.epsilon;
  const double sigma_core = std::pow(eps, 2.0 - n);
  const double q_core = std::pow(eps, -n);
  const AnisotropicProfile core{RadialFn(spec.core.sigma_r).stretched(eps).times(sigma_core),
                                RadialFn(spec.core.sigma_t).stretched(eps).times(sigma_core),
                                RadialFn(spec.core.q).stretched(eps).times(q_core)};
  std::vector<Layer> layers;
  Layer inner{0.0, eps * kCoreRadius, core, std::nullopt};
  if (spec.source) inner.source = RadialFn(*spec.source).stretched(eps).times(q_core);
  layers.push_back(inner);
  if (spec.lossy_enabled) {
    const double sigma_lossy = std::pow(eps, spec.r_exponent);
    AnisotropicProfile lossy{RadialFn(spec.lossy.gamma).stretched(eps).times(sigma_lossy),
                             RadialFn(spec.lossy.g).stretched(eps).times(sigma_lossy),
                             combine_modulus(spec.lossy.alpha, spec.lossy.beta, 1.0).stretched(eps)};
    layers.push_back(Layer{eps * kCoreRadius, eps * kCloakedRadius, lossy, std::nullopt});
  } else {
    layers.push_back(Layer{eps * kCoreRadius, eps * kCloakedRadius, core, std::nullopt});
  }
  return LayeredMedium(n, std::move(layers));
}

}  // namespace cloak::materials
