#pragma once

// Run configuration: strict JSON schema, parsing with field-level messages,
// and a canonical echo that parses back to the same configuration.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cloak/harness.hpp"
#include "json.hpp"

namespace cloak::config {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command {
  solve,
  sweep,
  source_sweep,
  equivalence,
  buster_passive,
  buster_active,
  sound_hard,
  oracle
};

std::string to_string(Command command);
/// Throws ConfigError for an unknown name.
Command parse_command(std::string_view name);

struct IncidentConfig {
  bool plane_wave = true;  // "kind": "plane_wave" | "none"
  double angle = 0.0;
  double amplitude = 1.0;
  bool operator==(const IncidentConfig&) const = default;
};

struct SolverConfig {
  double rel_tol = 1e-10;
  double tail_tol = 1e-10;
  int far_grid = 720;
  bool operator==(const SolverConfig&) const = default;
};

struct SweepConfig {
  std::vector<double> epsilon_grid = harness::kDefaultEpsilonGrid;
  harness::Observable observable = harness::Observable::sup_norm;
  harness::ProblemForm form = harness::ProblemForm::virtual_form;
  std::vector<materials::CoreParams> materials;  // extra cores for the uniformity check
  bool operator==(const SweepConfig&) const = default;
};

struct BusterConfig {
  double q_min = 1.0;
  double q_max = 4000.0;
  int points = 2000;
  std::vector<double> epsilon_grid{0.2, 0.1, 0.05, 0.025};
  double c0 = 1.0;
  bool operator==(const BusterConfig&) const = default;
};

struct SoundHardConfig {
  std::vector<double> tau_grid{0.1, 0.05, 0.025, 0.0125};
  bool operator==(const SoundHardConfig&) const = default;
};

struct LayerConfig {
  double r_outer = 1.0;
  CoefficientFn sigma_r = CoefficientFn::constant(1.0);
  CoefficientFn sigma_t = CoefficientFn::constant(1.0);
  CoefficientFn q = CoefficientFn::constant(1.0);
  std::optional<CoefficientFn> source;
  bool operator==(const LayerConfig&) const = default;
};

struct OutputConfig {
  std::string dir = ".";
  bool csv = true;
  bool json = true;
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  Command command = Command::solve;
  materials::CloakSpec spec;
  IncidentConfig incident;
  SolverConfig solver;
  SweepConfig sweep;
  BusterConfig buster;
  SoundHardConfig sound_hard;
  harness::ProblemForm solve_form = harness::ProblemForm::virtual_form;
  std::optional<std::vector<LayerConfig>> medium;  // explicit medium for `solve`
  OutputConfig output;
  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates. `command` overrides (and must agree with) a "command" key.
RunConfig parse_config(const json& doc, std::optional<Command> command = std::nullopt);
RunConfig parse_config(const std::string& text, std::optional<Command> command = std::nullopt);

/// Canonical document with every field spelled out.
json to_json(const RunConfig& config);

json coefficient_to_json(const CoefficientFn& fn);
/// Accepts a plain number or {"type": "constant" | "poly" | "table", ...}.
CoefficientFn coefficient_from_json(const json& value, const std::string& path);

scattering::SolveOptions solve_options(const RunConfig& config);
/// The explicit medium, if configured.
std::optional<materials::LayeredMedium> explicit_medium(const RunConfig& config);

}  // namespace cloak::config
