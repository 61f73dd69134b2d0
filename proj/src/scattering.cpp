#include "cloak/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cloak/specfun.hpp"

namespace cloak::scattering {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};
constexpr int kEnergyNodes = 64;

cplx i_pow(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0:
      return 1.0;
    case 1:
      return kI;
    case 2:
      return -1.0;
    default:
      return -kI;
  }
}

double angular_measure(ModeIndex mode) {
  return mode.dimension == 2 ? 2.0 * kPi : 4.0 * kPi / (2.0 * mode.k + 1.0);
}

double radial_weight(double r, int n) { return n == 2 ? r : r * r; }

}  // namespace

cplx incident_coeffs(const IncidentField& field, ModeIndex mode, int n) {
  if (field.kind == IncidentField::Kind::none) return 0.0;
  if (mode.dimension == 2) {
    if (std::abs(n) != mode.k) throw std::invalid_argument("signed order does not match mode");
    return field.amplitude * i_pow(mode.k) * std::exp(-kI * (n * field.angle));
  }
  return field.amplitude * (2.0 * mode.k + 1.0) * i_pow(mode.k);
}

ExteriorBasis exterior_basis(ModeIndex mode, double x) {
  ExteriorBasis e;
  if (mode.dimension == 2) {
    e.j = specfun::bessel_j(mode.k, x);
    e.jp = specfun::bessel_j_prime(mode.k, x);
    e.h = specfun::hankel1(mode.k, x);
    e.hp = specfun::hankel1_prime(mode.k, x);
  } else {
    e.j = specfun::spherical_j(mode.k, x);
    e.jp = specfun::spherical_j_prime(mode.k, x);
    e.h = specfun::spherical_h1(mode.k, x);
    e.hp = specfun::spherical_h1_prime(mode.k, x);
  }
  return e;
}

ModeSolution match_mode(const RobinData& robin, ModeIndex mode, double omega, double r_ext, cplx b,
                        int n) {
  const ExteriorBasis e = exterior_basis(mode, omega * r_ext);
  const double c = (mode.dimension == 2 ? r_ext : r_ext * r_ext) * omega;
  // [u  -H ] [kappa]   [b J - u_p        ]
  // [w  -cH'] [a    ] = [c b J' - w_p     ]
  const cplx rhs1 = b * e.j - robin.u_p;
  const cplx rhs2 = c * b * e.jp - robin.w_p;
  const cplx t1 = robin.u_val * c * e.hp;
  const cplx t2 = robin.flux_val * e.h;
  const cplx det = t2 - t1;
  if (!(std::abs(det) > 1e-14 * (std::abs(t1) + std::abs(t2)))) {
    throw DegenerateMatch("singular matching system for mode " + std::to_string(mode.k), mode.k);
  }
  ModeSolution s;
  s.mode = mode;
  s.n = n;
  s.b = b;
  s.kappa = (-rhs1 * c * e.hp + e.h * rhs2) / det;
  s.a = (robin.u_val * rhs2 - robin.flux_val * rhs1) / det;
  return s;
}

DirectionGrid DirectionGrid::make(int dimension, int count) {
  if (dimension != 2 && dimension != 3) throw std::invalid_argument("dimension must be 2 or 3");
  if (count < 360) {
    throw std::invalid_argument("far-field grid needs at least 360 directions (got " +
                                std::to_string(count) + ")");
  }
  DirectionGrid g;
  g.dimension = dimension;
  g.angles.resize(count);
  for (int j = 0; j < count; ++j) {
    g.angles[j] = dimension == 2 ? 2.0 * kPi * j / count : kPi * j / (count - 1);
  }
  return g;
}

cplx far_field_value(int dimension, double omega, const std::vector<ModeSolution>& modes,
                     double theta) {
  cplx sum = 0.0;
  if (dimension == 2) {
    for (const ModeSolution& m : modes) {
      sum += m.a * i_pow(-m.mode.k) * std::exp(kI * (m.n * theta));
    }
    return std::sqrt(2.0 / (kPi * omega)) * std::exp(-kI * (kPi / 4.0)) * sum;
  }
  const double t = std::clamp(std::cos(theta), -1.0, 1.0);
  for (const ModeSolution& m : modes) {
    sum += m.a * i_pow(-(m.mode.k + 1)) * specfun::legendre_p(m.mode.k, t);
  }
  return sum / omega;
}

FarField far_field(int dimension, double omega, const std::vector<ModeSolution>& modes,
                   const DirectionGrid& grid) {
  if (grid.dimension != dimension) throw std::invalid_argument("grid dimension mismatch");
  FarField f;
  f.dimension = dimension;
  f.omega = omega;
  f.azimuthally_symmetric = dimension == 3;
  f.modes = modes;
  f.angles = grid.angles;
  f.values.resize(grid.angles.size());
  for (std::size_t j = 0; j < grid.angles.size(); ++j) {
    f.values[j] = far_field_value(dimension, omega, modes, grid.angles[j]);
    f.sup_norm = std::max(f.sup_norm, std::abs(f.values[j]));
  }
  const std::size_t m = grid.angles.size();
  double acc = 0.0;
  if (dimension == 2) {
    for (const cplx& v : f.values) acc += std::norm(v);
    acc *= 2.0 * kPi / static_cast<double>(m);
  } else {
    const double h = kPi / static_cast<double>(m - 1);
    for (std::size_t j = 0; j < m; ++j) {
      const double w = (j == 0 || j + 1 == m) ? 0.5 : 1.0;
      acc += w * std::norm(f.values[j]) * std::sin(grid.angles[j]);
    }
    acc *= 2.0 * kPi * h;
  }
  f.l2_norm = std::sqrt(acc);
  return f;
}

int truncation_order(double omega, double r_ext, double tail_tol) {
  if (!(tail_tol > 0.0)) throw std::invalid_argument("tail_tol must be positive");
  const int k = std::max(10, static_cast<int>(std::ceil(omega * r_ext)) + 15);
  if (k > specfun::kMaxOrder) {
    throw std::out_of_range("initial truncation order " + std::to_string(k) +
                            " exceeds the supported order cap");
  }
  return k;
}

Solution solve(const LayeredMedium& medium, const IncidentField& field,
               const SolveOptions& options) {
  const int dim = medium.dimension();
  const double omega = field.omega;
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  const DirectionGrid grid = DirectionGrid::make(dim, options.far_grid);
  const double r_match = medium.matching_radius();
  Solution sol{medium.trimmed(), r_match, 0, {}, {}, {}, 0};
  if (!(options.tail_tol > 0.0)) throw std::invalid_argument("tail_tol must be positive");

  radial::SolverOptions solver = options.solver;
  if (options.keep_interior) solver.dense_nodes = kEnergyNodes;

  std::vector<double> mode_size;
  double max_size = 0.0;
  for (int k = 0;; ++k) {
    if (k > specfun::kMaxOrder) {
      throw std::out_of_range("mode tail did not decay below tail_tol by order " +
                              std::to_string(specfun::kMaxOrder));
    }
    const ModeIndex mode = ModeIndex::make(dim, k);
    std::vector<int> orders = (dim == 2 && k > 0) ? std::vector<int>{k, -k} : std::vector<int>{k};
    double size = 0.0;
    if (r_match == 0.0) {
      for (int n : orders) {
        const cplx b = incident_coeffs(field, mode, n);
        sol.modes.push_back(ModeSolution{mode, n, b, 0.0, b});
      }
    } else {
      RobinData robin = radial::interior_response(sol.medium, mode, omega, solver);
      sol.rk_steps += robin.steps;
      for (int n : orders) {
        const cplx b = incident_coeffs(field, mode, n);
        ModeSolution m = match_mode(robin, mode, omega, r_match, b, n);
        size = std::max(size, std::abs(m.a));
        sol.modes.push_back(m);
      }
      if (options.keep_interior) sol.interiors.push_back(std::move(robin));
    }
    mode_size.push_back(size);
    max_size = std::max(max_size, size);
    sol.k_max = k;
    if (k >= 2) {
      bool tail_small = true;
      for (int j = k - 2; j <= k; ++j) {
        if (mode_size[j] > options.tail_tol * max_size) tail_small = false;
      }
      if (tail_small) break;
    }
  }
  sol.far = far_field(dim, omega, sol.modes, grid);
  return sol;
}

EnergyReport energy_report(const Solution& solution, double omega) {
  EnergyReport rep;
  if (solution.r_match == 0.0) return rep;
  const LayeredMedium& medium = solution.medium;
  const int dim = medium.dimension();
  if (solution.interiors.size() != static_cast<std::size_t>(solution.k_max) + 1) {
    throw std::logic_error("energy report needs interior solutions for every retained mode");
  }
  const double r = solution.r_match;
  const double area = dim == 2 ? r : r * r;
  for (const ModeSolution& m : solution.modes) {
    const RobinData& in = solution.interiors[m.mode.k];
    if (in.dense.size() != medium.layers().size()) {
      throw std::logic_error("energy report needs dense interior output");
    }
    const double mu = angular_measure(m.mode);
    const double lambda = m.mode.lambda();
    double absorbed = 0.0;
    double work = 0.0;
    for (std::size_t i = 0; i < medium.layers().size(); ++i) {
      const auto& layer = medium.layers()[i];
      const auto& d = in.dense[i];
      for (std::size_t j = 0; j < d.r.size(); ++j) {
        const double rj = d.r[j];
        const double rw = radial_weight(rj, dim);
        cplx u = m.kappa * d.u_h[j];
        cplx w = m.kappa * d.w_h[j];
        if (m.mode.k == 0) {
          u += d.u_p[j];
          w += d.w_p[j];
        }
        const cplx sr = layer.profile.sigma_r(rj);
        const cplx st = layer.profile.sigma_t(rj);
        const cplx q = layer.profile.q(rj);
        const cplx du = w / (sr * rw);
        double integrand = omega * omega * q.imag() * std::norm(u) - sr.imag() * std::norm(du);
        if (lambda != 0.0) integrand -= st.imag() * lambda * std::norm(u) / (rj * rj);
        absorbed += d.weight[j] * rw * integrand;
        if (layer.source && m.mode.k == 0) {
          work += d.weight[j] * rw * ((*layer.source)(rj) * std::conj(u)).imag();
        }
      }
    }
    const ExteriorBasis e = exterior_basis(m.mode, omega * r);
    const cplx ur = m.b * e.j + m.a * e.h;
    const cplx dur = omega * (m.b * e.jp + m.a * e.hp);
    rep.absorbed_volume += mu * absorbed;
    rep.source_work += mu * work;
    rep.boundary_flux += -mu * area * (dur * std::conj(ur)).imag();
  }
  rep.residual = std::abs(rep.absorbed_volume - rep.boundary_flux - rep.source_work) /
                 std::max(1.0, std::abs(rep.boundary_flux));
  return rep;
}

double unitarity_defect(const std::vector<ModeSolution>& modes) {
  double worst = 0.0;
  for (const ModeSolution& m : modes) {
    if (m.b == cplx(0.0)) continue;
    worst = std::max(worst, std::abs(std::abs(1.0 + 2.0 * m.a / m.b) - 1.0));
  }
  return worst;
}

}  // namespace cloak::scattering
