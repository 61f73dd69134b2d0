#pragma once

// Mode matching against exterior Bessel/Hankel expansions, far-field assembly
// and energy diagnostics.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cloak/radial_solver.hpp"

namespace cloak::scattering {

using materials::LayeredMedium;
using radial::ModeIndex;
using radial::RobinData;

/// Singular 2x2 matching system: the mode sits on a resonance.
class DegenerateMatch : public std::runtime_error {
 public:
  DegenerateMatch(const std::string& what, int k) : std::runtime_error(what), k_(k) {}
  int mode() const { return k_; }

 private:
  int k_;
};

struct IncidentField {
  enum class Kind { plane_wave, none };
  Kind kind = Kind::plane_wave;
  double angle = 0.0;      // 2D propagation angle; 3D incidence is along the polar axis
  double omega = 1.0;
  double amplitude = 1.0;

  static IncidentField plane_wave(double omega, double angle = 0.0) {
    return {Kind::plane_wave, angle, omega, 1.0};
  }
  static IncidentField none(double omega) { return {Kind::none, 0.0, omega, 0.0}; }
};

/// Coefficient of the regular exterior solution for signed order n (2D) or degree
/// l = mode.k (3D). The 2D expansion uses J_|n|(omega r) e^{i n theta}.
cplx incident_coeffs(const IncidentField& field, ModeIndex mode, int n);
inline cplx incident_coeffs(const IncidentField& field, ModeIndex mode) {
  return incident_coeffs(field, mode, mode.k);
}

struct ModeSolution {
  ModeIndex mode;
  int n = 0;     // signed azimuthal order in 2D; equals mode.k in 3D
  cplx b;        // incident coefficient
  cplx a;        // outgoing coefficient
  cplx kappa;    // multiplier of the homogeneous Robin data
};

/// Regular and outgoing exterior functions with their argument derivatives.
struct ExteriorBasis {
  double j = 0.0;
  double jp = 0.0;
  cplx h;
  cplx hp;
};
ExteriorBasis exterior_basis(ModeIndex mode, double x);

/// Solves kappa*u + u_p = b J + a H and kappa*w + w_p = R^{N-1} omega (b J' + a H').
/// Throws DegenerateMatch for a singular system.
ModeSolution match_mode(const RobinData& robin, ModeIndex mode, double omega, double r_ext, cplx b,
                        int n);
inline ModeSolution match_mode(const RobinData& robin, ModeIndex mode, double omega, double r_ext,
                               cplx b) {
  return match_mode(robin, mode, omega, r_ext, b, mode.k);
}

struct DirectionGrid {
  int dimension = 2;
  std::vector<double> angles;  // theta in [0, 2pi) for 2D, polar angle in [0, pi] for 3D

  /// Throws std::invalid_argument for fewer than 360 directions.
  static DirectionGrid make(int dimension, int count = 720);
};

struct FarField {
  int dimension = 2;
  double omega = 1.0;
  bool azimuthally_symmetric = false;
  std::vector<ModeSolution> modes;
  std::vector<double> angles;
  std::vector<cplx> values;
  double sup_norm = 0.0;
  double l2_norm = 0.0;
};

/// A at one direction.
cplx far_field_value(int dimension, double omega, const std::vector<ModeSolution>& modes,
                     double theta);
FarField far_field(int dimension, double omega, const std::vector<ModeSolution>& modes,
                   const DirectionGrid& grid);

/// Initial truncation max(10, ceil(omega R) + 15). Throws for tail_tol <= 0.
int truncation_order(double omega, double r_ext, double tail_tol);

struct SolveOptions {
  radial::SolverOptions solver;
  double tail_tol = 1e-10;
  int far_grid = 720;
  bool keep_interior = false;  // retain quadrature-node samples for energy_report
};

struct Solution {
  LayeredMedium medium;                    // the medium as matched (trailing vacuum removed)
  double r_match = 0.0;
  int k_max = 0;
  std::vector<ModeSolution> modes;
  std::vector<radial::RobinData> interiors;  // indexed by k, when kept
  FarField far;
  std::int64_t rk_steps = 0;
};

/// Full per-mode pipeline with adaptive truncation.
Solution solve(const LayeredMedium& medium, const IncidentField& field,
               const SolveOptions& options = {});

struct EnergyReport {
  double absorbed_volume = 0.0;  // omega^2 int Im q |u|^2 - int Im sigma |grad u|^2
  double boundary_flux = 0.0;    // -Im of the outward flux integral of u_r conj(u)
  double source_work = 0.0;      // Im int f conj(u)
  double residual = 0.0;
};

/// Throws std::logic_error if the solution was computed without keep_interior.
EnergyReport energy_report(const Solution& solution, double omega);

/// max over modes of | |1 + 2 a/b| - 1 | for modes with b != 0.
double unitarity_defect(const std::vector<ModeSolution>& modes);

}  // namespace cloak::scattering
