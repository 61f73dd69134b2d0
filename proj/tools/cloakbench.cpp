#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cloak/report.hpp"

namespace {

void print_checks(const nlohmann::json& summary) {
  for (const auto& c : summary["checks"]) {
    std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>();
    if (c.contains("value")) {
      std::cout << "  " << c["value"].dump() << " " << c["relation"].get<std::string>() << " "
                << c["limit"].dump();
    }
    std::cout << "\n";
  }
  if (summary["results"].contains("error")) {
    std::cerr << "error: " << summary["results"]["error"]["message"].get<std::string>() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-cloak scattering benchmarks"};
  app.set_version_flag("--version", cloak::report::kVersion);
  std::string command;
  std::string config_path;
  std::string out_dir;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("command", command,
                 "solve | sweep | source-sweep | equivalence | buster-passive | buster-active | "
                 "sound-hard | oracle")
      ->required();
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 1024));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cloak::report::kConfigError;
  }

  cloak::config::RunConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) throw cloak::config::ConfigError("cannot read config file " + config_path);
    std::stringstream text;
    text << in.rdbuf();
    cfg = cloak::config::parse_config(text.str(), cloak::config::parse_command(command));
  } catch (const cloak::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cloak::report::kConfigError;
  }

  const std::filesystem::path dir = out_dir.empty() ? cfg.output.dir : out_dir;
  try {
    const auto outcome = cloak::report::run(cfg, dir, workers);
    print_checks(outcome.summary);
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cloak::report::kSolverError;
  }
}
