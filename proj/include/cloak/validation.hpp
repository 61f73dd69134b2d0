#pragma once

// Self-checks against closed forms: Wronskians, homogeneous balls, complex
// layered media, invariance under radial changes of variables.

#include <cstdint>
#include <string>
#include <vector>

#include "cloak/scattering.hpp"

namespace cloak::validation {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Max relative Wronskian defect over orders 0..20 and x in {0.1, 0.5, 1, 2, 5, 10, 50}.
double wronskian_defect(int dimension);

/// sup|A_solver - A_closed| / sup|A_closed| for a homogeneous ball (sigma, q real).
double mie_discrepancy(int dimension, double omega, double radius, double sigma, double q,
                       const scattering::SolveOptions& options = {});

/// Max over modes 0..10 of |a_solver - a_oracle| / max_k |a_oracle| for a three-layer
/// medium with complex constant coefficients and a core source.
double layered_discrepancy(int dimension, double omega,
                           const scattering::SolveOptions& options = {});

/// Random piecewise-affine map of [0, r_ext] onto itself with `pieces` pieces.
materials::PiecewiseRadialMap random_radial_map(double r_ext, int pieces, std::uint64_t seed);

/// Max relative change of sup|A| over `trials` random push-forwards of a fixed medium.
double transformation_defect(int dimension, int trials, std::uint64_t seed,
                             const scattering::SolveOptions& options = {});

/// Per-mode unitarity defect for a lossless (real-coefficient) cloak-free medium.
double lossless_unitarity(int dimension, const scattering::SolveOptions& options = {});

/// The suite run by the `oracle` command.
std::vector<Check> oracle_suite(const scattering::SolveOptions& options = {});

}  // namespace cloak::validation
