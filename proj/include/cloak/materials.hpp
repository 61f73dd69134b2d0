#pragma once

// Radial material profiles, the blow-up map and push-forwards, and assembly of
// the physical cloak medium and its equivalent small-inclusion (virtual) form.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cloak/coefficient.hpp"

namespace cloak::materials {

/// Invalid medium or specification; the message names the offending field.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// sigma = sigma_r * (radial projector) + sigma_t * (tangential projector), modulus q.
struct AnisotropicProfile {
  RadialFn sigma_r = RadialFn::constant(1.0);
  RadialFn sigma_t = RadialFn::constant(1.0);
  RadialFn q = RadialFn::constant(1.0);

  static AnisotropicProfile vacuum() { return {}; }
  static AnisotropicProfile isotropic(RadialFn sigma, RadialFn q) { return {sigma, sigma, q}; }

  /// True only when all three coefficients are the exact constant 1.
  bool is_vacuum() const;
};

struct Layer {
  double r_inner = 0.0;
  double r_outer = 0.0;
  AnisotropicProfile profile;
  std::optional<RadialFn> source;  // radial source density, excites mode 0 only

  bool is_vacuum() const { return !source && profile.is_vacuum(); }
};

/// Concentric layers tiling (0, r_ext]; vacuum beyond r_ext.
class LayeredMedium {
 public:
  /// Throws SpecError unless layers are contiguous from r = 0 and sources occupy
  /// only a leading run of layers.
  LayeredMedium(int dimension, std::vector<Layer> layers);

  int dimension() const { return dimension_; }
  const std::vector<Layer>& layers() const { return layers_; }
  double r_ext() const { return layers_.empty() ? 0.0 : layers_.back().r_outer; }
  bool has_source() const;

  /// Outer radius of the outermost layer that is not vacuum (0 if none).
  double matching_radius() const;
  /// The medium truncated at matching_radius().
  LayeredMedium trimmed() const;
  /// The medium padded with a vacuum layer out to radius r (no-op if r <= r_ext).
  LayeredMedium extended_to(double r) const;
  /// Copy with an extra interface at radius r (no-op on an existing interface).
  LayeredMedium split_at(double r) const;

 private:
  int dimension_;
  std::vector<Layer> layers_;
};

/// Affine radial map s = a + b t from [t_lo, t_hi] onto [s_lo, s_hi], b > 0.
class RadialMap {
 public:
  /// The unique orientation-preserving affine map between two intervals.
  static RadialMap between(double t_lo, double t_hi, double s_lo, double s_hi);

  double a() const { return a_; }
  double b() const { return b_; }
  double t_lo() const { return t_lo_; }
  double t_hi() const { return t_hi_; }
  double s_lo() const { return s_lo_; }
  double s_hi() const { return s_hi_; }

  double operator()(double t) const;
  double inverse(double s) const;
  /// this ∘ inner; the inner codomain must equal this domain.
  RadialMap compose(const RadialMap& inner) const;

 private:
  double a_ = 0.0;
  double b_ = 1.0;
  double t_lo_ = 0.0;
  double t_hi_ = 1.0;
  double s_lo_ = 0.0;
  double s_hi_ = 1.0;
};

/// Contiguous affine pieces; the first piece starts at t = 0 with f(0) = 0.
class PiecewiseRadialMap {
 public:
  explicit PiecewiseRadialMap(std::vector<RadialMap> pieces);

  const std::vector<RadialMap>& pieces() const { return pieces_; }
  double domain_end() const { return pieces_.back().t_hi(); }
  double operator()(double t) const;

 private:
  std::vector<RadialMap> pieces_;
};

/// Affine map [eps, rho_outer] -> [rho_cloaked, rho_outer].
RadialMap blowup_map(double epsilon, double rho_cloaked = 1.0, double rho_outer = 2.0);

/// x -> x/eps on [0, eps] followed by blowup_map on [eps, rho_outer].
PiecewiseRadialMap full_blowup_map(double epsilon, double rho_cloaked = 1.0,
                                   double rho_outer = 2.0);

/// Push-forward of a radial profile; the result lives on the map's codomain.
AnisotropicProfile push_forward_radial(const RadialMap& map, const AnisotropicProfile& profile,
                                       int dimension);

/// Source density transported with the same Jacobian as q.
RadialFn push_forward_source(const RadialMap& map, const RadialFn& source, int dimension);

/// Push-forward of a whole medium; the map domain must equal [0, medium.r_ext()].
LayeredMedium push_forward_medium(const PiecewiseRadialMap& map, const LayeredMedium& medium);

struct LossyParams {
  CoefficientFn gamma = CoefficientFn::constant(1.0);
  CoefficientFn g = CoefficientFn::constant(1.0);
  CoefficientFn alpha = CoefficientFn::constant(1.0);
  CoefficientFn beta = CoefficientFn::constant(1.0);
  bool operator==(const LossyParams&) const = default;
};

struct CoreParams {
  CoefficientFn sigma_r = CoefficientFn::constant(1.0);
  CoefficientFn sigma_t = CoefficientFn::constant(1.0);
  CoefficientFn q = CoefficientFn::constant(5.0);
  bool operator==(const CoreParams&) const = default;
};

/// Geometry: core D_{1/2}, lossy layer D \ D_{1/2}, cloak shell Omega \ D with
/// D the unit ball and Omega the ball of radius 2.
struct CloakSpec {
  int dimension = 2;
  double epsilon = 0.1;
  double r_exponent = 2.0;
  double omega = 1.0;
  bool lossy_enabled = true;  // when false the core material fills D
  LossyParams lossy;
  CoreParams core;
  std::optional<CoefficientFn> source;  // supported on [0, 1/2]
  std::optional<double> absorption_floor;
  bool allow_buster = false;  // skips the absorption-floor requirement
  bool operator==(const CloakSpec&) const = default;
};

inline constexpr double kCoreRadius = 0.5;
inline constexpr double kCloakedRadius = 1.0;
inline constexpr double kOuterRadius = 2.0;
inline constexpr int kValidationSamples = 1000;

struct SpecBounds {
  double alpha_max = 0.0;
  double beta_min = 0.0;
  double beta_max = 0.0;
  std::optional<double> absorption_floor;  // effective q0 when a source is present
};

/// Checks every CloakSpec invariant by sampling; throws SpecError.
SpecBounds validate(const CloakSpec& spec);

/// Lower bound on r: 2 - N/2.
double min_r_exponent(int dimension);

Layer lossy_layer_physical(const CloakSpec& spec);
LayeredMedium assemble_physical(const CloakSpec& spec);
LayeredMedium assemble_virtual(const CloakSpec& spec);

}  // namespace cloak::materials
