#pragma once
// Experiment orchestration: CSV ingestion, scenario-matrix execution
// (privacy weight × cost mode × device set, optionally × dispatch mode)
// over a shared household, parallel cell execution with deterministic
// reporting, and summary emission.

#include <cstdint>
#include <string>
#include <vector>

#include "privshape/config.hpp"
#include "privshape/controller.hpp"

namespace privshape {

// CSV sources; an empty path means "not supplied".
struct ProfilePaths {
  std::string sensitive, draws, outdoor, irradiance;
};

// Reads and validates a CSV bundle.  All series must share their start
// time; hourly series must agree on length; 5-minute series must carry
// exactly 12 samples per hour and are averaged to hourly for control
// while being retained verbatim for dispatch.  Series supplied hourly
// get piecewise-constant 5-minute companions so dispatch always has a
// sub-hourly view.  Errors cite the offending file (and line, for
// format problems).
ProfileBundle ingest_profiles(const ProfilePaths& paths);

// The bundle a scenario asks for: fully synthetic when no sensitive CSV
// is named, otherwise ingested; a named sensitive CSV with a missing
// companion that the configured devices need is a hard error.
ProfileBundle prepare_bundle(const ScenarioConfig& cfg);

// Scenario with every device configured at its catalog parameters —
// the template the standard matrix is built from.
ScenarioConfig standard_scenario();

struct MatrixCell {
  int index = 0;
  std::string label;       // directory-safe unique name
  std::string system;      // "none", "ess", "ewh", "ewh+erh"
  bool cost_aware = true;
  double mu = 0;
  bool step = false;
  int baseline = -1;       // index of the cell whose cost anchors the % delta
  ScenarioConfig cfg;      // fully resolved
};

struct ExperimentMatrix {
  ScenarioConfig base;  // devices configured here form the pool; days/seed shared
  std::vector<std::string> systems{"none", "ess", "ewh", "ewh+erh"};
  std::vector<double> mus{0.0, 5.0, 10.0};
  bool cost_blind_rows = true;   // add the c == 0 variant of every device row
  std::vector<bool> step_modes{false};
  int parallelism = 1;
  std::string output_dir;  // empty = nothing written
};

// Expands the matrix into its cells: "none" becomes a single passthrough
// cell; device systems get one cell per (cost mode, mu, step mode).
// Cost-delta baselines: the cost-aware mu = 0 cell of the same system and
// step mode, except storage-only rows, which anchor to the passthrough.
std::vector<MatrixCell> matrix_cells(const ExperimentMatrix& m);

struct CellResult {
  MatrixCell cell;
  RunReport report;
  AuditResult audit;
  double cost_delta_pct = 0;  // vs the baseline cell's absolute cost
  bool failed = false;
  std::string error;
};

struct MatrixResult {
  std::vector<CellResult> cells;  // cell-index order
  std::string cells_csv, summary_privacy_csv, summary_cost_csv;  // "" if unwritten
  bool all_ok = false;
};

// Runs every cell on one shared bundle prepared from the template (so
// paired comparisons see the same household), in parallel up to
// m.parallelism, then writes reports in cell order: cells.csv (full
// numeric detail), a privacy summary (rows system × cost mode, columns
// mu × {iid, markov} in bits to 3 decimals), a cost summary (baseline
// rows absolute cents/day, other rows % delta), and per-cell run
// directories with the committed profiles, per-step breakdown and the
// cell's resolved config.  Individual cell failures are recorded and do
// not stop the rest.
MatrixResult run_matrix(const ExperimentMatrix& m);

}  // namespace privshape
