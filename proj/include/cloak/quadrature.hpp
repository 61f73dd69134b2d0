#pragma once

#include <vector>

namespace cloak {

struct QuadratureRule {
  std::vector<double> nodes;    // ascending, in (-1, 1)
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]; cached per n, thread-safe.
const QuadratureRule& gauss_legendre(int n);

}  // namespace cloak
