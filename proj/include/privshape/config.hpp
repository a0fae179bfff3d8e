#pragma once
// Scenario configuration: one flat human-readable key/value file with a
// section per concern ([scenario], [tariff], [binning], [solver], optional
// [ess]/[ewh]/[erh] device blocks, [profiles], [synthetic]).
//
// Parsing is strict: unknown sections or keys are errors, and
// parse_config(serialize_config(c)) == c field-for-field (doubles are written
// with round-trip precision).

#include <cstdint>
#include <optional>
#include <string>

#include "privshape/core.hpp"
#include "privshape/devices.hpp"

namespace privshape {

struct ScenarioConfig {
  // [scenario]
  std::string name = "scenario";
  int horizon = 24;  // planning window length in hours (lookahead steps per solve)
  double mu = 0.0;   // privacy weight on the shaping objective
  double rho = 10.0;  // comfort-slack weight
  bool include_energy_cost = true;  // false runs with c == 0 (cost-blind shaping)
  int history_window = 168;         // trailing hours feeding the online histogram
  double control_eps = 0.0583;      // additive smoothing inside the controller
  double score_eps = 0.0;           // additive smoothing for offline scoring
  int days = 30;                    // controlled days (history seeding is extra)
  std::uint64_t seed = 1;
  bool step_load = false;  // dispatch thermal duties as 5-minute on/off slots
  double link_margin = 1e-6;  // closes the strict side of the bin-link inequality
  std::string start = "2026-01-05T00:00:00";

  Tariff tariff;

  // [binning]
  int x_bins = 24;
  int y_bins = 24;
  double y_min = 0.0;
  double y_max = 12.0;

  std::optional<EssModel> ess;
  std::optional<EwhModel> ewh;
  std::optional<ErhModel> erh;

  // [solver]
  int solver_max_iter = 200000;
  double solver_eps = 1e-9;
  double kkt_tol = 1e-6;
  int node_limit = 10000;

  // [profiles] — an empty sensitive path makes the whole scenario
  // synthetic; when a sensitive CSV is named, every companion series the
  // configured devices need must be named too (missing ones are errors).
  std::string sensitive_csv;
  std::string draws_csv;
  std::string outdoor_csv;
  std::string irradiance_csv;

  // [synthetic]
  std::string archetype = "house-23618-like";

  bool operator==(const ScenarioConfig&) const = default;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& cfg);
void save_config(const ScenarioConfig& cfg, const std::string& path);

}  // namespace privshape
