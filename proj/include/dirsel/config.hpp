#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dirsel/model.hpp"
#include "dirsel/nutrient.hpp"
#include "dirsel/numerics.hpp"

namespace dirsel {

enum class TimeConvention { Selection, Raw };

struct SweepSettings {
  std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> compare_times{0.25, 0.5, 0.75, 1.0};
};

// Everything a run needs; built from the JSON config.
struct Scenario {
  ModelParams params;
  InitialData initial;
  Grids grids;
  TimeConvention time_convention = TimeConvention::Selection;
  int picard = 0;
  SweepSettings sweep;
  std::string output_dir = "out";
  bool plots = true;
  std::optional<double> test_forcing_amplitude;

  std::optional<ManufacturedNutrient> forcing() const;
};

// Defaults: r(x) = 3 - (x - 0.5)^2, d(x) = 1 + (x - 0.5)^2, lambda = 8,
// c_B = 4, L = 5, X0(y) = 0.5 + 0.2 tanh(y), sigma0 = 0.05.
Scenario default_scenario();

// Parses and fills defaults; throws Config (with line or key path) on
// malformed input, unknown keys or bad values. Does not check the model
// assumptions.
Scenario parse_config(const std::string& text, const std::string& origin = "<string>");

// parse_config on a file's contents.
Scenario read_config(const std::string& path);

// read_config + validate_assumptions; throws NonExtinction when rho_m <= 0,
// Validation listing every failed check otherwise.
Scenario load_config(const std::string& path);
void require_valid(const Scenario& scenario);

nlohmann::json to_json(const Scenario& scenario);
std::string echo_config(const Scenario& scenario);

// Config keys next to the model symbols they set.
std::string symbol_table(const Scenario& scenario);

// Config warnings that do not block a run, e.g. an initial Gaussian narrower
// than 4 x-spacings for some eps.
std::vector<std::string> config_warnings(const Scenario& scenario);

}  // namespace dirsel
