#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tcsim/scenario.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalFailure = 3, kInvariantViolation = 4 };

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw tcsim::Error(tcsim::ErrorKind::Config, "cannot open config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-photon Tavis-Cummings atom in a standing-wave cavity: scenario runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tcsim::kLibraryVersion);

  auto* run = app.add_subcommand("run", "run one scenario from a JSON config");
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config_path, "path to the JSON config")->required();
  run->add_option("--out", out_dir, "output directory (overrides output_dir)");
  run->add_option("--seed", seed, "RNG seed (overrides seed)");

  auto* list = app.add_subcommand("scenarios", "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  if (list->parsed()) {
    for (const auto& s : tcsim::scenario_catalog()) std::cout << s.name << "\t" << s.description << "\n";
    return kOk;
  }

  try {
    auto cfg = tcsim::validate_config(read_file(config_path));
    if (out_dir) cfg.output_dir = *out_dir;
    if (seed) cfg.seed = *seed;
    const auto manifest = tcsim::run_scenario(cfg);
    std::cout << manifest.doc["results"].dump(2) << "\n";
    if (!manifest.invariants_ok) {
      std::cerr << "invariant violation: " << manifest.doc["invariant_drift"].dump() << "\n";
      return kInvariantViolation;
    }
    return kOk;
  } catch (const tcsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.kind() == tcsim::ErrorKind::Config) return kConfigError;
    if (e.kind() == tcsim::ErrorKind::InvariantViolation) return kInvariantViolation;
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}
