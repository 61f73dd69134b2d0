#pragma once

// Per-angular-mode radial ODE through a layered medium:
//   d/dr [sigma_r r^{N-1} u'] = r^{N-1} (lambda sigma_t / r^2 - omega^2 q) u + r^{N-1} f
// integrated as a first-order system in (u, w) with w = sigma_r r^{N-1} u'.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cloak/materials.hpp"

namespace cloak::radial {

using materials::Layer;
using materials::LayeredMedium;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModeIndex {
  int dimension = 2;
  int k = 0;  // |n| in 2D, degree l in 3D

  /// Throws std::invalid_argument on a bad dimension or negative k.
  static ModeIndex make(int dimension, int k);
  double lambda() const { return dimension == 2 ? double(k) * k : double(k) * (k + 1); }
};

/// (u, w) carried with a binary exponent: the true state is 2^scale_exp2 * (u, w).
struct SolverState {
  double r = 0.0;
  cplx u;
  cplx w;
  std::int64_t scale_exp2 = 0;

  double scale_log() const;  // natural log of the carried scale
};

struct SolverOptions {
  double rel_tol = 1e-10;
  double renorm_upper = 1e100;
  double renorm_lower = 1e-100;
  double seed_fraction = 1e-6;  // r0 = seed_fraction * innermost r_outer
  std::int64_t max_steps_per_layer = 1'000'000;
  int dense_nodes = 0;          // Gauss-Legendre nodes recorded per layer (0 = none)
};

/// Interior solution sampled at quadrature nodes of one layer.
struct DenseLayer {
  std::vector<double> r;
  std::vector<double> weight;  // Gauss-Legendre weight mapped to [r_inner, r_outer]
  std::vector<cplx> u_h;       // homogeneous, in the normalization of RobinData::u_val
  std::vector<cplx> w_h;
  std::vector<cplx> u_p;       // particular (true scale); zero when absent
  std::vector<cplx> w_p;
};

struct RobinData {
  double r_ext = 0.0;
  cplx u_val;        // regular solution, arbitrary normalization
  cplx flux_val;     // sigma_r r^{N-1} u' of the same solution
  std::int64_t scale_exp2 = 0;
  bool has_particular = false;
  cplx u_p;          // zero-data particular solution driven by the source
  cplx w_p;
  std::int64_t steps = 0;
  std::vector<DenseLayer> dense;
};

/// (du/dr, dw/dr) at state.r, inside the given layer. Throws SolverError if sigma_r = 0.
std::pair<cplx, cplx> ode_rhs(const Layer& layer, ModeIndex mode, double omega,
                              const SolverState& state);

/// Indicial exponent of the regular solution at the origin.
cplx indicial_exponent(const Layer& innermost, ModeIndex mode);

/// Leading-power regular solution at r0, with r0^m carried in the binary exponent.
SolverState regular_seed(const Layer& innermost, ModeIndex mode, double r0);

/// Propagates start (at layer.r_inner or the seed radius) to layer.r_outer with the
/// homogeneous equation plus the layer source, if any.
SolverState integrate_layer(const SolverState& start, const Layer& layer, ModeIndex mode,
                            double omega, const SolverOptions& options = {});

/// Regular (and, with a source, particular) solution carried to medium.r_ext().
RobinData interior_response(const LayeredMedium& medium, ModeIndex mode, double omega,
                            const SolverOptions& options = {});

}  // namespace cloak::radial
