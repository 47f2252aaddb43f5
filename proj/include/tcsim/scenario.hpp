#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcsim/analytic.hpp"
#include "tcsim/semiclassical.hpp"

namespace tcsim {

inline constexpr const char* kLibraryVersion = "1.0.0";

enum class Scenario {
  ResonantBifurcation,
  NonresonantSwitching,
  ChaoticMotion,
  PurityAdiabatic,
  PurityWeakRegular,
  PurityWeakChaotic,
  Custom
};

struct ScenarioInfo {
  Scenario id;
  const char* name;
  const char* description;
};

const std::vector<ScenarioInfo>& scenario_catalog();
Scenario scenario_from_name(const std::string& name);
const char* scenario_name(Scenario s);

enum class CustomSystem { Hybrid, Full, Strong };

struct RunConfig {
  Scenario scenario = Scenario::Custom;
  ModelParams params;
  SemiclassicalState initial;
  struct {
    double t_max = 1, dt_out = 0.01, rtol = 1e-9, atol = 1e-12;
    CustomSystem system = CustomSystem::Hybrid;
  } integrate;
  struct {
    std::optional<int> n_max;
    double alpha0 = 1;
    int realizations = 100000;
    double mc_t_max = 3;
  } quantum;
  struct {
    double max_lag = 20;
    KappaForm kappa_form = KappaForm::Linear;
    double singularity_multiple = 10;
    SwitchingConvention switching = SwitchingConvention::Consistent;
    int grid_t = 200, grid_x = 200;
    double grid_t_max = 10;
    double final_window = 0.2;  // trailing fraction of the run
  } analysis;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

// Parses a JSON document, applies the scenario defaults and enforces every
// consistency rule. Throws Error(Config) naming the offending field.
RunConfig validate_config(const std::string& text);
RunConfig default_config(Scenario s);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

struct RunManifest {
  nlohmann::ordered_json doc;
  bool invariants_ok = true;
};

// Writes the scenario outputs and manifest.json into cfg.output_dir.
RunManifest run_scenario(const RunConfig& cfg);

}  // namespace tcsim
