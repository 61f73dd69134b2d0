#pragma once

// Command dispatch and result artifacts: CSV tables, summary.json, exit codes.

#include <filesystem>
#include <string>
#include <vector>

#include "cloak/config.hpp"

namespace cloak::report {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kPass = 0, kChecksFailed = 1, kConfigError = 2, kSolverError = 3 };

/// %.17g
std::string format_double(double value);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Header "log10_eps,log10_norm,fit_line"; one row per record.
std::string plot_table(const harness::SweepResult& sweep);
/// Same layout for arbitrary positive (x, y) data and a natural-log fit.
std::string plot_table(const std::vector<double>& x, const std::vector<double>& y,
                       const harness::RateFit& fit, const std::string& x_name = "log10_eps");
void emit_plot_table(const harness::SweepResult& sweep, const std::filesystem::path& path);

std::string farfield_csv(const scattering::FarField& far);
std::string modes_csv(const std::vector<scattering::ModeSolution>& modes);

struct Outcome {
  int exit_code = kPass;
  config::json summary;  // {command, config, results, checks, timing, version}
  std::vector<std::pair<std::string, std::string>> files;  // name, content
};

/// Runs the command without touching the filesystem.
Outcome execute(const config::RunConfig& config, int workers);

/// execute() followed by writing the enabled artifacts into out_dir.
Outcome run(const config::RunConfig& config, const std::filesystem::path& out_dir, int workers);

}  // namespace cloak::report
