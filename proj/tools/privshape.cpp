// Command-line front end: scoring, closed-form reference checks, single
// scenario runs, the experiment matrix, and synthetic profile generation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "privshape/config.hpp"
#include "privshape/controller.hpp"
#include "privshape/csvio.hpp"
#include "privshape/harness.hpp"
#include "privshape/mi_metrics.hpp"
#include "privshape/synth.hpp"
#include "privshape/theory.hpp"

namespace {

using namespace privshape;

ScenarioConfig config_or_standard(const std::string& path) {
  return path.empty() ? standard_scenario() : load_config(path);
}

int cmd_score(const std::string& x_path, const std::string& y_path,
              const std::string& config_path, double eps) {
  const ScenarioConfig cfg = config_or_standard(config_path);
  const LoadProfile x = read_profile_csv(x_path, ProfileRole::sensitive_load);
  const LoadProfile y = read_profile_csv(y_path, ProfileRole::grid_load);
  if (x.size() != y.size())
    throw std::runtime_error("score: series lengths differ (" + std::to_string(x.size()) +
                             " vs " + std::to_string(y.size()) + ")");
  const BinningScheme bins = run_binning(cfg, x.values);
  const MiReport r = score_pair(x.values, y.values, bins, eps);
  std::printf("iid_mi_bits      %s\n", format_double(r.iid_mi_bits).c_str());
  std::printf("markov_mi_bits   %s\n", format_double(r.markov_mi_bits).c_str());
  std::printf("entropy_x_bits   %s\n", format_double(r.entropy_x_bits).c_str());
  return 0;
}

int cmd_theory(std::uint64_t seed, const std::string& output_dir) {
  const TheoryReport rep = run_theory_checks(seed);
  std::printf("%-34s %16s %16s %10s  %s\n", "check", "value", "reference", "tolerance",
              "result");
  for (const TheoryCheck& c : rep.checks)
    std::printf("%-34s %16.9f %16.9f %10.2e  %s\n", c.name.c_str(), c.value, c.reference,
                c.tolerance, c.pass ? "pass" : "FAIL");
  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    std::vector<std::vector<std::string>> rows;
    for (const TheoryCheck& c : rep.checks)
      rows.push_back({c.name, format_double(c.value), format_double(c.reference),
                      format_double(c.tolerance), c.pass ? "pass" : "fail"});
    write_table_csv(output_dir + "/theory.csv",
                    {"check", "value", "reference", "tolerance", "result"}, rows);
  }
  return rep.all_pass ? 0 : 1;
}

int cmd_run(const std::string& config_path, const std::string& output_dir, std::uint64_t seed,
            int days, bool dump_first_qp) {
  ScenarioConfig cfg = config_or_standard(config_path);
  if (seed != 0) cfg.seed = seed;
  if (days > 0) cfg.days = days;
  const ProfileBundle bundle = prepare_bundle(cfg);

  if (dump_first_qp) {
    const int W = cfg.history_window;
    const int H = cfg.horizon;
    ControlState state;
    state.hist_x.assign(bundle.x.begin(), bundle.x.begin() + W);
    state.hist_y = state.hist_x;
    if (cfg.ess) state.ess_energy = cfg.ess->initial_energy();
    if (cfg.ewh) state.ewh = EwhState{cfg.ewh->t_set, cfg.ewh->t_set};
    if (cfg.erh) state.erh_t_in = cfg.erh->t_set;
    Forecasts fc;
    fc.x.assign(bundle.x.begin() + W, bundle.x.begin() + W + H);
    if (cfg.ewh) fc.draws.assign(bundle.draws.begin() + W, bundle.draws.begin() + W + H);
    if (cfg.erh) {
      fc.t_out.assign(bundle.t_out.begin() + W, bundle.t_out.begin() + W + H);
      fc.irradiance.assign(bundle.irradiance.begin() + W, bundle.irradiance.begin() + W + H);
    }
    fc.hour_of_day.resize(H);
    for (int t = 0; t < H; ++t) fc.hour_of_day[t] = hour_of_day(bundle.hourly.at(W + t));
    const StepProgram sp =
        build_step_program(state, fc, cfg, cfg.ess.has_value(), cfg.ewh.has_value(),
                           cfg.erh.has_value(), run_binning(cfg, bundle.x));
    if (output_dir.empty()) {
      std::ostringstream out;
      sp.qp.dump_triplets(out);
      std::fputs(out.str().c_str(), stdout);
    } else {
      std::filesystem::create_directories(output_dir);
      std::ofstream out(output_dir + "/first_step_qp.txt");
      sp.qp.dump_triplets(out);
      std::printf("wrote %s/first_step_qp.txt\n", output_dir.c_str());
    }
    return 0;
  }

  const RunReport rep = run_receding_horizon(cfg, bundle);
  const AuditResult audit = audit_run(cfg, bundle, rep);
  std::printf("scenario            %s\n", rep.name.c_str());
  std::printf("steps               %d (%d days)\n", rep.steps, rep.days);
  std::printf("iid_mi_bits         %.6f\n", rep.iid_mi_bits);
  std::printf("markov_mi_bits      %.6f\n", rep.markov_mi_bits);
  std::printf("entropy_x_bits      %.6f\n", rep.entropy_x_bits);
  std::printf("avg_daily_cost_c    %.3f\n", rep.avg_daily_cost_cents);
  std::printf("comfort_violations  %d (max %.4f degC)\n", rep.comfort_violation_count,
              rep.comfort_violation_max);
  std::printf("solver_failures     %d   fallback_steps %d   nodes %lld\n", rep.solver_failures,
              rep.fallback_steps, rep.total_nodes);
  std::printf("audit_max_violation %.3e   balance_error %.3e\n", audit.max_violation,
              audit.max_balance_error);
  if (rep.dispatch_flagged_hours > 0)
    std::printf("dispatch_flagged    %d hours (max unflagged duty dev %.6f)\n",
                rep.dispatch_flagged_hours, rep.max_unflagged_duty_deviation);
  for (const std::string& note : audit.notes) std::printf("audit note: %s\n", note.c_str());
  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    save_config(cfg, output_dir + "/scenario.cfg");
    write_profile_csv(output_dir + "/x.csv",
                      LoadProfile(rep.controlled_grid, ProfileRole::sensitive_load, rep.x));
    write_profile_csv(output_dir + "/y.csv",
                      LoadProfile(rep.controlled_grid, ProfileRole::grid_load, rep.y));
  }
  return audit.max_violation <= 1e-6 ? 0 : 1;
}

int cmd_matrix(const std::string& config_path, const std::string& output_dir,
               std::uint64_t seed, int days, int parallelism, const std::string& mus_arg,
               const std::string& systems_arg, bool no_cost_blind, bool with_step) {
  ExperimentMatrix m;
  m.base = config_or_standard(config_path);
  if (seed != 0) m.base.seed = seed;
  if (days > 0) m.base.days = days;
  m.parallelism = parallelism;
  m.output_dir = output_dir;
  m.cost_blind_rows = !no_cost_blind;
  if (with_step) m.step_modes = {false, true};
  if (!mus_arg.empty()) {
    m.mus.clear();
    std::stringstream ss(mus_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) m.mus.push_back(std::stod(tok));
  }
  if (!systems_arg.empty()) {
    m.systems.clear();
    std::stringstream ss(systems_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) m.systems.push_back(tok);
  }
  const MatrixResult res = run_matrix(m);
  for (const CellResult& r : res.cells) {
    if (r.failed) {
      std::printf("%-28s FAILED: %s\n", r.cell.label.c_str(), r.error.c_str());
    } else {
      std::printf("%-28s iid %.3f  markov %.3f  cost %.2f c/day  delta %+.3f%%\n",
                  r.cell.label.c_str(), r.report.iid_mi_bits, r.report.markov_mi_bits,
                  r.report.avg_daily_cost_cents, r.cost_delta_pct);
    }
  }
  if (!res.cells_csv.empty())
    std::printf("reports: %s, %s, %s\n", res.cells_csv.c_str(),
                res.summary_privacy_csv.c_str(), res.summary_cost_csv.c_str());
  return res.all_ok ? 0 : 1;
}

int cmd_generate(std::uint64_t seed, int days, const std::string& archetype,
                 const std::string& output_dir) {
  const ProfileBundle b = generate_synthetic_profile(seed, days, archetype);
  const std::string dir = output_dir.empty() ? "." : output_dir;
  std::filesystem::create_directories(dir);
  write_profile_csv(dir + "/x.csv", LoadProfile(b.hourly, ProfileRole::sensitive_load, b.x));
  const TimeGrid grid_5min{b.hourly.start, 300, b.draws_5min.size()};
  write_profile_csv(dir + "/draws.csv",
                    LoadProfile(grid_5min, ProfileRole::hot_water_draw, b.draws_5min));
  write_profile_csv(dir + "/outdoor.csv",
                    LoadProfile(b.hourly, ProfileRole::outdoor_temperature, b.t_out));
  write_profile_csv(dir + "/irradiance.csv",
                    LoadProfile(b.hourly, ProfileRole::irradiance, b.irradiance));
  std::printf("wrote %s/{x,draws,outdoor,irradiance}.csv (%zu hours, draws at 5 min)\n",
              dir.c_str(), b.x.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"household load shaping and leakage scoring"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  std::uint64_t seed = 0;
  int days = 0;
  int parallelism = 1;
  app.add_option("--config", config_path, "scenario config file (default: built-in standard)");
  app.add_option("--output-dir", output_dir, "directory for emitted CSVs");
  app.add_option("--seed", seed, "override the scenario seed (0 keeps the config value)");
  app.add_option("--days", days, "override the controlled-day count (0 keeps the config value)");
  app.add_option("--parallelism", parallelism, "worker threads for the matrix");

  auto* score = app.add_subcommand("score", "score an (x, y) profile pair");
  std::string x_path, y_path;
  double score_eps = 0.0;
  score->add_option("--x", x_path, "sensitive-load CSV")->required();
  score->add_option("--y", y_path, "grid-load CSV")->required();
  score->add_option("--eps", score_eps, "additive smoothing for the histograms");

  auto* theory = app.add_subcommand("theory", "closed-form reference checks");

  auto* run = app.add_subcommand("run", "run one scenario");
  bool dump_first_qp = false;
  run->add_flag("--dump-first-qp", dump_first_qp,
                "dump the first planning program as triplets and exit");

  auto* matrix = app.add_subcommand("matrix", "run the scenario matrix");
  std::string mus_arg, systems_arg;
  bool no_cost_blind = false, with_step = false;
  matrix->add_option("--mus", mus_arg, "comma-separated privacy weights (default 0,5,10)");
  matrix->add_option("--systems", systems_arg,
                     "comma-separated systems (default none,ess,ewh,ewh+erh)");
  matrix->add_flag("--no-cost-blind", no_cost_blind, "skip the c == 0 rows");
  matrix->add_flag("--with-step", with_step, "add 5-minute dispatch variants of every row");

  auto* generate = app.add_subcommand("generate", "emit a synthetic household");
  std::string archetype = "house-23618-like";
  generate->add_option("--archetype", archetype, "household archetype");

  CLI11_PARSE(app, argc, argv);

  try {
    if (score->parsed()) return cmd_score(x_path, y_path, config_path, score_eps);
    if (theory->parsed()) return cmd_theory(seed == 0 ? 7 : seed, output_dir);
    if (run->parsed()) return cmd_run(config_path, output_dir, seed, days, dump_first_qp);
    if (matrix->parsed())
      return cmd_matrix(config_path, output_dir.empty() ? "matrix_out" : output_dir, seed, days,
                        parallelism, mus_arg, systems_arg, no_cost_blind, with_step);
    if (generate->parsed())
      return cmd_generate(seed == 0 ? 1 : seed, days == 0 ? 30 : days, archetype, output_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
