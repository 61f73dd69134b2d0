#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace cloak {

using cplx = std::complex<double>;

/// Serializable radial coefficient: a complex constant, a complex polynomial
/// in r, or a sampled table with linear interpolation.
class CoefficientFn {
 public:
  enum class Kind { constant, polynomial, table };

  struct TablePoint {
    double r = 0.0;
    cplx value;
    bool operator==(const TablePoint&) const = default;
  };

  CoefficientFn() : coeffs_{cplx(0.0)} {}

  static CoefficientFn constant(cplx value);
  /// sum_k coeffs[k] * r^k
  static CoefficientFn polynomial(std::vector<cplx> coeffs);
  /// Abscissae must be strictly increasing; at least two points.
  static CoefficientFn table(std::vector<TablePoint> points);

  /// Throws std::domain_error for a table evaluated outside its abscissae.
  cplx operator()(double r) const;

  Kind kind() const { return kind_; }
  const std::vector<cplx>& coefficients() const { return coeffs_; }
  const std::vector<TablePoint>& points() const { return points_; }

  bool is_constant() const { return kind_ == Kind::constant; }
  bool operator==(const CoefficientFn&) const = default;

 private:
  Kind kind_ = Kind::constant;
  std::vector<cplx> coeffs_;
  std::vector<TablePoint> points_;
};

/// Immutable, cheaply copyable function of the radius. Carries its constant
/// value when it has one, so vacuum layers can be recognized exactly.
class RadialFn {
 public:
  RadialFn() : RadialFn(constant(0.0)) {}
  RadialFn(const CoefficientFn& fn);  // NOLINT(google-explicit-constructor)

  static RadialFn constant(cplx value);
  static RadialFn wrap(std::function<cplx(double)> fn);

  cplx operator()(double r) const { return (*fn_)(r); }
  const std::optional<cplx>& constant_value() const { return constant_; }

  /// factor * f(r)
  RadialFn times(cplx factor) const;
  /// f(r / length): the coefficient stretched so that r = length maps to 1.
  RadialFn stretched(double length) const;

 private:
  RadialFn(std::function<cplx(double)> fn, std::optional<cplx> constant);

  std::shared_ptr<const std::function<cplx(double)>> fn_;
  std::optional<cplx> constant_;
};

}  // namespace cloak
