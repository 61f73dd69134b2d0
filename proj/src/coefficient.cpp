#include "cloak/coefficient.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cloak {

CoefficientFn CoefficientFn::constant(cplx value) {
  CoefficientFn fn;
  fn.kind_ = Kind::constant;
  fn.coeffs_ = {value};
  return fn;
}

CoefficientFn CoefficientFn::polynomial(std::vector<cplx> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("polynomial coefficient needs at least one term");
  CoefficientFn fn;
  fn.kind_ = Kind::polynomial;
  fn.coeffs_ = std::move(coeffs);
  return fn;
}

CoefficientFn CoefficientFn::table(std::vector<TablePoint> points) {
  if (points.size() < 2) throw std::invalid_argument("table coefficient needs at least two points");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].r > points[i - 1].r)) {
      throw std::invalid_argument("table abscissae must be strictly increasing (violated at index " +
                                  std::to_string(i) + ")");
    }
  }
  CoefficientFn fn;
  fn.kind_ = Kind::table;
  fn.points_ = std::move(points);
  return fn;
}

cplx CoefficientFn::operator()(double r) const {
  switch (kind_) {
    case Kind::constant:
      return coeffs_.front();
    case Kind::polynomial: {
      cplx acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + *it;
      return acc;
    }
    case Kind::table: {
      // Small relative slack at the ends so interval endpoints evaluate cleanly.
      const double lo = points_.front().r;
      const double hi = points_.back().r;
      const double slack = 1e-12 * std::max(1.0, std::abs(hi));
      if (r < lo - slack || r > hi + slack) {
        throw std::domain_error("table coefficient evaluated at r = " + std::to_string(r) +
                                " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                "]");
      }
      const double rc = std::clamp(r, lo, hi);
      auto upper = std::upper_bound(points_.begin(), points_.end(), rc,
                                    [](double v, const TablePoint& p) { return v < p.r; });
      if (upper == points_.end()) return points_.back().value;
      if (upper == points_.begin()) return points_.front().value;
      const auto& p1 = *upper;
      const auto& p0 = *(upper - 1);
      const double t = (rc - p0.r) / (p1.r - p0.r);
      return p0.value + t * (p1.value - p0.value);
    }
  }
  return 0.0;
}

RadialFn::RadialFn(const CoefficientFn& fn)
    : fn_(std::make_shared<const std::function<cplx(double)>>(fn)) {
  if (fn.is_constant()) constant_ = fn(0.0);
}

RadialFn::RadialFn(std::function<cplx(double)> fn, std::optional<cplx> constant)
    : fn_(std::make_shared<const std::function<cplx(double)>>(std::move(fn))),
      constant_(constant) {}

RadialFn RadialFn::constant(cplx value) {
  return RadialFn([value](double) { return value; }, value);
}

RadialFn RadialFn::wrap(std::function<cplx(double)> fn) {
  return RadialFn(std::move(fn), std::nullopt);
}

RadialFn RadialFn::times(cplx factor) const {
  if (constant_) return constant(factor * *constant_);
  auto inner = fn_;
  return wrap([inner, factor](double r) { return factor * (*inner)(r); });
}

RadialFn RadialFn::stretched(double length) const {
  if (constant_) return *this;
  auto inner = fn_;
  return wrap([inner, length](double r) { return (*inner)(r / length); });
}

}  // namespace cloak
