#pragma once

// Epsilon sweeps with log-log rate fits, physical/virtual equivalence, small
// sound-hard obstacle rates and resonance scans.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cloak/scattering.hpp"

namespace cloak::harness {

using materials::CloakSpec;

enum class Observable { sup_norm, l2_norm };
enum class ProblemForm { virtual_form, physical };

inline const std::vector<double> kDefaultEpsilonGrid{0.2, 0.141, 0.1, 0.0707, 0.05, 0.0354, 0.025};
inline constexpr double kSlopeSlack = 0.3;

/// Runs fn(0..count-1) on up to `workers` threads. Results must be written by index;
/// the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// Passive: min(N + 2r - 4, N). Active: min(N/2, N/2 + r - 2). Throws for r <= 2 - N/2.
double theoretical_exponent(int dimension, double r, bool active);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;       // natural-log intercept
  double residual = 0.0;        // max |log norm - fit|
  double theoretical_exponent = 0.0;
  double slack = kSlopeSlack;
  double slope_without_largest = 0.0;  // refit after dropping the largest epsilon
  bool pass = false;            // slope >= exponent - slack
};

/// Least squares on (log x, log y). Throws unless y > 0 and at least two points.
RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y, double exponent,
                 double slack = kSlopeSlack);

struct SweepPlan {
  CloakSpec base;
  std::vector<double> epsilon_grid = kDefaultEpsilonGrid;
  Observable observable = Observable::sup_norm;
  ProblemForm form = ProblemForm::virtual_form;
  scattering::SolveOptions solve;
  bool plane_wave = true;  // false: no incident field (pure radiation)

  /// Grid strictly decreasing inside (0, 1); throws std::invalid_argument.
  void validate() const;
};

struct SweepRecord {
  double epsilon = 0.0;
  double norm = 0.0;  // the selected observable
  double sup_norm = 0.0;
  double l2_norm = 0.0;
  double absorbed = 0.0;
  double energy_residual = 0.0;
  int k_max = 0;
  std::int64_t rk_steps = 0;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // in grid order
  RateFit fit;
  double reference_norm = 0.0;
  bool reference_check = false;  // smallest-epsilon norm < 1e-2 * reference
  bool pass = false;
};

/// Plane-wave reference: unit disk/ball with sigma = 1, q = 5.
double reference_norm(int dimension, double omega, Observable observable);

/// Single solve of spec in the chosen form, with energy diagnostics.
SweepRecord solve_point(const CloakSpec& spec, ProblemForm form, bool plane_wave,
                        Observable observable, const scattering::SolveOptions& options);

SweepResult run_sweep(const SweepPlan& plan, int workers = 1);
/// Requires a source; a zero source reduces to run_sweep.
SweepResult run_source_sweep(const SweepPlan& plan, int workers = 1);

/// sup |A_phys - A_virt| / max(sup |A_virt|, 1e-300).
double equivalence_check(const CloakSpec& spec, const scattering::SolveOptions& options = {},
                         bool plane_wave = true);

struct SoundHardResult {
  std::vector<double> tau;
  std::vector<double> sup_norm;
  RateFit fit;
};
SoundHardResult sound_hard_rate(int dimension, const std::vector<double>& tau_grid, double omega);

struct BusterPoint {
  double q_a = 0.0;
  double sup_norm = 0.0;  // +inf for a degenerate match
  bool degenerate = false;
};

struct BusterScan {
  double epsilon = 0.0;
  bool lossy = false;
  std::vector<BusterPoint> points;
  std::size_t peak_index = 0;
  double peak = 0.0;
  double median = 0.0;
  double peak_to_median = 0.0;
  double reference_norm = 0.0;
  std::optional<double> budget;  // rate budget at epsilon (lossy scans)
  bool pass = false;
};

/// Log-spaced grid of `count` values on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int count);

/// Budget C * eps^p, C = max over the plan's sweep of norm / eps^p.
double rate_budget(const SweepResult& sweep, double epsilon);

/// Scans real q_a with sigma_a = 1 in the virtual problem at base.epsilon.
/// Without the lossy layer pass means a resonance: peak >= 0.1 * reference and
/// peak >= 10 * median. With it: peak <= 2 * median and peak <= budget.
BusterScan buster_scan_passive(const CloakSpec& base, const std::vector<double>& q_grid,
                               const scattering::SolveOptions& options,
                               std::optional<double> budget, int workers = 1);

struct ActiveDemo {
  std::vector<SweepRecord> records;
  std::optional<RateFit> fit;  // absent when every norm is zero
  bool non_decaying = false;   // slope <= 0.2
  std::optional<SweepResult> cloaked;  // same source behind the full lossy cloak, q_a = 1 + i;
                                       // absent for c0 = 0
  bool pass = false;
};

inline constexpr double kNonDecayingSlope = 0.2;

/// Uncloaked source configuration sigma_a = 1, q_a = eps^2, f = c0 in 2D.
ActiveDemo buster_demo_active(const std::vector<double>& epsilon_grid, double c0, double omega,
                              const scattering::SolveOptions& options, int workers = 1);

}  // namespace cloak::harness
