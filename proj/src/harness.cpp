#include "privshape/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "privshape/csvio.hpp"
#include "privshape/mi_metrics.hpp"
#include "privshape/synth.hpp"

namespace privshape {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("harness: " + msg);
}

// One ingested series in both resolutions.
struct Series {
  bool present = false;
  std::vector<double> hourly;
  std::vector<double> five_min;
  EpochSeconds start = 0;
  bool native_5min = false;
};

Series load_series(const std::string& path, ProfileRole role) {
  Series s;
  if (path.empty()) return s;
  const LoadProfile p = read_profile_csv(path, role);
  s.present = true;
  s.start = p.grid.start;
  if (p.grid.step_seconds == 300) {
    if (p.size() % 12 != 0)
      fail(path + ": 5-minute series length " + std::to_string(p.size()) +
           " is not a whole number of hours");
    s.native_5min = true;
    s.five_min = p.values;
    s.hourly.resize(p.size() / 12);
    for (std::size_t h = 0; h < s.hourly.size(); ++h) {
      double sum = 0;
      for (int k = 0; k < 12; ++k) sum += p.values[h * 12 + k];
      s.hourly[h] = sum / 12.0;
    }
  } else {
    s.hourly = p.values;
    s.five_min.resize(p.size() * 12);
    for (std::size_t h = 0; h < p.size(); ++h)
      for (int k = 0; k < 12; ++k) s.five_min[h * 12 + k] = p.values[h];
  }
  return s;
}

}  // namespace

ProfileBundle ingest_profiles(const ProfilePaths& paths) {
  if (paths.sensitive.empty()) fail("no sensitive-load file named");
  const Series x = load_series(paths.sensitive, ProfileRole::sensitive_load);
  const Series draws = load_series(paths.draws, ProfileRole::hot_water_draw);
  const Series t_out = load_series(paths.outdoor, ProfileRole::outdoor_temperature);
  const Series irr = load_series(paths.irradiance, ProfileRole::irradiance);

  const std::size_t hours = x.hourly.size();
  auto check_aligned = [&](const Series& s, const std::string& path) {
    if (!s.present) return;
    if (s.start != x.start)
      fail(path + ": starts at " + format_iso8601(s.start) + " but " + paths.sensitive +
           " starts at " + format_iso8601(x.start));
    if (s.hourly.size() != hours)
      fail(path + ": covers " + std::to_string(s.hourly.size()) + " hours but " +
           paths.sensitive + " covers " + std::to_string(hours));
  };
  check_aligned(draws, paths.draws);
  check_aligned(t_out, paths.outdoor);
  check_aligned(irr, paths.irradiance);

  ProfileBundle b;
  b.hourly = TimeGrid{x.start, 3600, hours};
  b.x = x.hourly;
  b.draws = draws.hourly;
  b.t_out = t_out.hourly;
  b.irradiance = irr.hourly;
  b.draws_5min = draws.five_min;
  b.t_out_5min = t_out.five_min;
  b.irradiance_5min = irr.five_min;
  b.has_5min = true;
  return b;
}

ProfileBundle prepare_bundle(const ScenarioConfig& cfg) {
  if (cfg.sensitive_csv.empty()) {
    return generate_synthetic_profile(cfg.seed, cfg.days, cfg.archetype,
                                      parse_iso8601(cfg.start));
  }
  if (cfg.ewh && cfg.draws_csv.empty())
    fail("water heater configured but no draw file named");
  if (cfg.erh && (cfg.outdoor_csv.empty() || cfg.irradiance_csv.empty()))
    fail("space heater configured but outdoor/irradiance files missing");
  return ingest_profiles(
      ProfilePaths{cfg.sensitive_csv, cfg.draws_csv, cfg.outdoor_csv, cfg.irradiance_csv});
}

ScenarioConfig standard_scenario() {
  ScenarioConfig cfg;
  cfg.name = "standard";
  cfg.ess = EssModel{};
  cfg.ewh = EwhModel{};
  cfg.erh = ErhModel{};
  return cfg;
}

namespace {

std::string mu_tag(double mu) {
  std::string s = format_double(mu);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

void apply_system(ScenarioConfig& cfg, const std::string& system, const ScenarioConfig& base) {
  cfg.ess.reset();
  cfg.ewh.reset();
  cfg.erh.reset();
  if (system == "none") return;
  if (system == "ess") {
    if (!base.ess) fail("matrix template has no storage model for system \"ess\"");
    cfg.ess = base.ess;
    return;
  }
  if (system == "ewh") {
    if (!base.ewh) fail("matrix template has no water-heater model for system \"ewh\"");
    cfg.ewh = base.ewh;
    return;
  }
  if (system == "ewh+erh") {
    if (!base.ewh || !base.erh)
      fail("matrix template lacks thermal models for system \"ewh+erh\"");
    cfg.ewh = base.ewh;
    cfg.erh = base.erh;
    return;
  }
  fail("unknown system \"" + system + "\"");
}

}  // namespace

std::vector<MatrixCell> matrix_cells(const ExperimentMatrix& m) {
  std::vector<MatrixCell> cells;
  auto add_cell = [&](const std::string& system, bool aware, double mu, bool step) {
    MatrixCell c;
    c.index = static_cast<int>(cells.size());
    c.system = system;
    c.cost_aware = aware;
    c.mu = mu;
    c.step = step;
    c.cfg = m.base;
    apply_system(c.cfg, system, m.base);
    c.cfg.mu = mu;
    c.cfg.include_energy_cost = aware;
    c.cfg.step_load = step;
    std::ostringstream label;
    label << system << (aware ? "-cost" : "-nocost") << "-mu" << mu_tag(mu);
    if (step) label << "-step";
    if (system == "none") label.str("passthrough");
    c.label = label.str();
    c.cfg.name = c.label;
    cells.push_back(std::move(c));
  };

  std::vector<bool> costs{true};
  if (m.cost_blind_rows) costs.push_back(false);
  for (const std::string& system : m.systems) {
    if (system == "none") {
      add_cell(system, true, 0.0, false);
      continue;
    }
    for (bool step : m.step_modes)
      for (bool aware : costs)
        for (double mu : m.mus) add_cell(system, aware, mu, step);
  }

  // Cost baselines: same system and step mode, cost-aware, mu = 0 —
  // except storage rows, which anchor to the passthrough household.
  int passthrough = -1;
  for (const MatrixCell& c : cells)
    if (c.system == "none") passthrough = c.index;
  for (MatrixCell& c : cells) {
    if (c.system == "none") continue;
    if (c.system == "ess") {
      c.baseline = passthrough;
      continue;
    }
    for (const MatrixCell& b : cells)
      if (b.system == c.system && b.step == c.step && b.cost_aware && b.mu == 0.0)
        c.baseline = b.index;
  }
  return cells;
}

namespace {

std::string fmt3(double bits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", bits);
  return buf;
}

void write_cell_artifacts(const std::string& dir, const CellResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const RunReport& rep = r.report;
  save_config(r.cell.cfg, dir + "/scenario.cfg");
  if (r.failed) {
    write_table_csv(dir + "/error.csv", {"error"}, {{r.error}});
    return;
  }
  write_profile_csv(dir + "/x.csv",
                    LoadProfile(rep.controlled_grid, ProfileRole::sensitive_load, rep.x));
  write_profile_csv(dir + "/y.csv",
                    LoadProfile(rep.controlled_grid, ProfileRole::grid_load, rep.y));

  std::vector<std::vector<std::string>> rows;
  rows.reserve(rep.x.size());
  for (std::size_t t = 0; t < rep.x.size(); ++t) {
    std::vector<std::string> row;
    row.push_back(format_iso8601(rep.controlled_grid.at(t)));
    for (double v : {rep.x[t], rep.y[t], rep.s_ess[t], rep.p_charge[t], rep.p_discharge[t],
                     rep.energy[t], rep.s_ewh[t], rep.duty_ewh_low[t], rep.duty_ewh_up[t],
                     rep.t_ewh_low[t], rep.t_ewh_up[t], rep.s_erh[t], rep.duty_erh[t],
                     rep.t_erh_in[t], rep.obj_cost[t], rep.obj_privacy[t], rep.obj_comfort[t]})
      row.push_back(format_double(v));
    row.push_back(std::to_string(rep.fallback_flags[t]));
    row.push_back(std::to_string(rep.dispatch_flags[t]));
    rows.push_back(std::move(row));
  }
  write_table_csv(dir + "/steps.csv",
                  {"timestamp_iso8601", "x_kw", "y_kw", "s_ess_kw", "p_charge_kw",
                   "p_discharge_kw", "energy_kwh", "s_ewh_kw", "duty_ewh_low", "duty_ewh_up",
                   "t_ewh_low_c", "t_ewh_up_c", "s_erh_kw", "duty_erh", "t_erh_in_c",
                   "plan_cost_term", "plan_privacy_term", "plan_comfort_term", "fallback",
                   "dispatch_flag"},
                  rows);
}

}  // namespace

MatrixResult run_matrix(const ExperimentMatrix& m) {
  MatrixResult out;
  const std::vector<MatrixCell> cells = matrix_cells(m);
  const ProfileBundle bundle = prepare_bundle(m.base);

  out.cells.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      CellResult& r = out.cells[i];
      r.cell = cells[i];
      try {
        r.report = run_receding_horizon(r.cell.cfg, bundle);
        r.audit = audit_run(r.cell.cfg, bundle, r.report);
      } catch (const std::exception& e) {
        r.failed = true;
        r.error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(m.parallelism, static_cast<int>(cells.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Cost deltas against each cell's baseline.
  for (CellResult& r : out.cells) {
    if (r.failed || r.cell.baseline < 0) continue;
    const CellResult& base = out.cells[r.cell.baseline];
    if (base.failed || base.report.avg_daily_cost_cents == 0) continue;
    r.cost_delta_pct = 100.0 *
                       (r.report.avg_daily_cost_cents - base.report.avg_daily_cost_cents) /
                       base.report.avg_daily_cost_cents;
  }

  out.all_ok = std::none_of(out.cells.begin(), out.cells.end(),
                            [](const CellResult& r) { return r.failed; });

  if (m.output_dir.empty()) return out;
  namespace fs = std::filesystem;
  fs::create_directories(m.output_dir);

  // Full numeric detail, one row per cell.
  {
    std::vector<std::vector<std::string>> rows;
    for (const CellResult& r : out.cells) {
      const RunReport& rep = r.report;
      std::vector<std::string> row{
          std::to_string(r.cell.index),
          r.cell.label,
          r.cell.system,
          r.cell.cost_aware ? "cost" : "nocost",
          format_double(r.cell.mu),
          r.cell.step ? "step" : "hourly",
          std::to_string(r.cell.baseline),
          r.failed ? "failed" : "ok",
      };
      if (r.failed) {
        row.insert(row.end(), 25, "");
        row.push_back(r.error);
      } else {
        for (double v :
             {rep.iid_mi_bits, rep.markov_mi_bits, rep.entropy_x_bits, rep.total_cost_cents,
              rep.avg_daily_cost_cents, r.cost_delta_pct,
              static_cast<double>(rep.comfort_violation_count), rep.comfort_violation_max,
              static_cast<double>(rep.solver_failures), static_cast<double>(rep.fallback_steps),
              static_cast<double>(rep.total_nodes), rep.max_kkt_primal,
              rep.max_kkt_stationarity, rep.max_kkt_complementarity,
              rep.projection_magnitude_max, static_cast<double>(rep.dispatch_flagged_hours),
              rep.max_unflagged_duty_deviation, r.audit.max_violation,
              r.audit.max_balance_error, rep.binning.x.lo, rep.binning.x.hi,
              static_cast<double>(rep.binning.x.count), rep.binning.y.lo, rep.binning.y.hi,
              static_cast<double>(rep.binning.y.count)})
          row.push_back(format_double(v));
        row.push_back("");
      }
      rows.push_back(std::move(row));
    }
    out.cells_csv = m.output_dir + "/cells.csv";
    write_table_csv(out.cells_csv,
                    {"index", "label", "system", "cost_mode", "mu", "sim_mode", "baseline",
                     "status", "iid_mi_bits", "markov_mi_bits", "entropy_x_bits",
                     "total_cost_cents", "avg_daily_cost_cents", "cost_delta_pct",
                     "comfort_violations", "comfort_violation_max_c", "solver_failures",
                     "fallback_steps", "total_nodes", "max_kkt_primal", "max_kkt_stationarity",
                     "max_kkt_complementarity", "projection_magnitude_max",
                     "dispatch_flagged_hours", "max_unflagged_duty_deviation",
                     "audit_max_violation", "audit_balance_error", "x_bin_lo", "x_bin_hi",
                     "x_bin_count", "y_bin_lo", "y_bin_hi", "y_bin_count", "error"},
                    rows);
  }

  // Privacy summary: rows system × cost mode (× sim mode), columns mu ×
  // {iid, markov}, bits to three decimals.
  {
    std::vector<std::string> header{"system", "cost_mode", "sim_mode"};
    for (double mu : m.mus) {
      header.push_back("mu" + mu_tag(mu) + "_iid_bits");
      header.push_back("mu" + mu_tag(mu) + "_markov_bits");
    }
    std::vector<std::vector<std::string>> rows;
    auto cell_at = [&](const std::string& system, bool aware, double mu,
                       bool step) -> const CellResult* {
      for (const CellResult& r : out.cells)
        if (r.cell.system == system && r.cell.cost_aware == aware && r.cell.mu == mu &&
            r.cell.step == step)
          return &r;
      return nullptr;
    };
    for (const std::string& system : m.systems) {
      if (system == "none") {
        const CellResult* r = cell_at(system, true, 0.0, false);
        if (!r) continue;
        std::vector<std::string> row{system, "cost", "hourly"};
        for (std::size_t k = 0; k < m.mus.size(); ++k) {
          row.push_back(r->failed ? "" : fmt3(r->report.iid_mi_bits));
          row.push_back(r->failed ? "" : fmt3(r->report.markov_mi_bits));
        }
        rows.push_back(std::move(row));
        continue;
      }
      for (bool step : m.step_modes)
        for (bool aware : m.cost_blind_rows ? std::vector<bool>{true, false}
                                            : std::vector<bool>{true}) {
          std::vector<std::string> row{system, aware ? "cost" : "nocost",
                                       step ? "step" : "hourly"};
          for (double mu : m.mus) {
            const CellResult* r = cell_at(system, aware, mu, step);
            row.push_back(r && !r->failed ? fmt3(r->report.iid_mi_bits) : "");
            row.push_back(r && !r->failed ? fmt3(r->report.markov_mi_bits) : "");
          }
          rows.push_back(std::move(row));
        }
    }
    out.summary_privacy_csv = m.output_dir + "/summary_privacy.csv";
    write_table_csv(out.summary_privacy_csv, header, rows);
  }

  // Cost summary: baseline rows carry absolute cents/day, the rest carry
  // % deltas against their baseline.
  {
    std::vector<std::string> header{"system", "cost_mode", "sim_mode", "metric"};
    for (double mu : m.mus) header.push_back("mu" + mu_tag(mu));
    std::vector<std::vector<std::string>> rows;
    auto find_cell = [&](const std::string& system, bool aware, double mu,
                         bool step) -> const CellResult* {
      for (const CellResult& r : out.cells)
        if (r.cell.system == system && r.cell.cost_aware == aware && r.cell.mu == mu &&
            r.cell.step == step)
          return &r;
      return nullptr;
    };
    for (const std::string& system : m.systems) {
      if (system == "none") {
        const CellResult* r = find_cell(system, true, 0.0, false);
        if (!r) continue;
        std::vector<std::string> row{system, "cost", "hourly", "abs_cents_per_day"};
        row.push_back(r->failed ? "" : format_double(r->report.avg_daily_cost_cents));
        for (std::size_t k = 1; k < m.mus.size(); ++k) row.push_back("");
        rows.push_back(std::move(row));
        continue;
      }
      for (bool step : m.step_modes) {
        const CellResult* base = find_cell(system, true, 0.0, step);
        if (base) {
          std::vector<std::string> row{system, "cost", step ? "step" : "hourly",
                                       "abs_cents_per_day"};
          row.push_back(base->failed ? "" : format_double(base->report.avg_daily_cost_cents));
          for (std::size_t k = 1; k < m.mus.size(); ++k) row.push_back("");
          rows.push_back(std::move(row));
        }
        for (bool aware : m.cost_blind_rows ? std::vector<bool>{true, false}
                                            : std::vector<bool>{true}) {
          std::vector<std::string> row{system, aware ? "cost" : "nocost",
                                       step ? "step" : "hourly", "delta_pct_vs_baseline"};
          for (double mu : m.mus) {
            const CellResult* r = find_cell(system, aware, mu, step);
            row.push_back(r && !r->failed ? format_double(r->cost_delta_pct) : "");
          }
          rows.push_back(std::move(row));
        }
      }
    }
    out.summary_cost_csv = m.output_dir + "/summary_cost.csv";
    write_table_csv(out.summary_cost_csv, header, rows);
  }

  for (const CellResult& r : out.cells)
    write_cell_artifacts(m.output_dir + "/runs/" + r.cell.label, r);

  return out;
}

}  // namespace privshape
