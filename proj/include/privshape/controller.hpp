#pragma once

// Receding-horizon controller: assembles one quadratic program per hour
// from the privacy surrogate, the tariff, and the configured devices;
// commits only the first step; simulates the devices forward on realized
// inputs; and scores the resulting grid-visible profile.  A secondary
// dispatcher converts hourly duty cycles into 5-minute on/off slots.

#include <string>
#include <vector>

#include "privshape/config.hpp"
#include "privshape/core.hpp"
#include "privshape/devices.hpp"
#include "privshape/mi_objective.hpp"
#include "privshape/miqp.hpp"

namespace privshape {

// Input series for one run.  All hourly series share the grid; draw
// series carry litres-per-hour rates (so resampling by mean conserves
// volume).  The 5-minute companions, when present, hold 12 samples per
// hour for the dispatcher.
struct ProfileBundle {
  TimeGrid hourly;
  std::vector<double> x;           // sensitive load, kW
  std::vector<double> draws;       // litres/h
  std::vector<double> t_out;       // °C
  std::vector<double> irradiance;  // kW equivalent
  std::vector<double> draws_5min, t_out_5min, irradiance_5min;
  bool has_5min = false;
};

struct ControlState {
  std::vector<double> hist_x, hist_y;  // trailing scoring window, oldest first
  double ess_energy = 0;               // kWh
  EwhState ewh;
  double erh_t_in = 22.0;
};

struct Forecasts {
  std::vector<double> x;            // length = horizon
  std::vector<double> draws;        // litres/h
  std::vector<double> t_out;
  std::vector<double> irradiance;
  std::vector<int> hour_of_day;     // tariff lookup per step
};

struct ObjectiveBreakdown {
  double cost = 0;     // horizon-averaged tariff term, cents
  double privacy = 0;  // weighted surrogate value
  double comfort = 0;  // weighted squared comfort slack
  double total = 0;
};

struct ControlStepResult {
  double x = 0, y = 0;
  double p_charge = 0, p_discharge = 0, s_ess = 0;
  double duty_ewh_low = 0, duty_ewh_up = 0, s_ewh = 0;
  double duty_erh = 0, s_erh = 0;
  ObjectiveBreakdown objective;
  std::vector<double> plan_y;  // full-horizon diagnostic
  SolveStatus status = SolveStatus::optimal;
  double gap = 0;
  int nodes = 0;
  KktResiduals kkt;
  double projection_magnitude = 0;
  bool fallback = false;  // passthrough used because no plan was available
};

// The assembled per-step program with its variable layout, for solving
// and for the plain-text debug dump.
struct StepProgram {
  QuadraticProgram qp;
  VarSpan y;
  bool has_ess = false, has_ewh = false, has_erh = false, has_privacy = false;
  EssVars ess;
  EwhVars ewh;
  ErhVars erh;
  VarSpan comfort_slack;
  MiProgramVars mi_vars;
  MiApproxProgram mi_program;
  std::vector<GatedPair> pairs;
};

StepProgram build_step_program(const ControlState& state, const Forecasts& fc,
                               const ScenarioConfig& cfg, bool use_ess, bool use_ewh,
                               bool use_erh, const BinningScheme& binning);

// Storage-only planning step.
ControlStepResult plan_step_ess(const ControlState& state, const Forecasts& fc,
                                const ScenarioConfig& cfg, const BinningScheme& binning);

// Flexible-thermal planning step over the chosen device subset.
ControlStepResult plan_step_ftl(const ControlState& state, const Forecasts& fc,
                                const ScenarioConfig& cfg, bool use_ewh, bool use_erh,
                                const BinningScheme& binning);

// One hour of 5-minute slots for the thermal devices: greedy front-fill
// toward each element's duty target, deferring or forcing slots when a
// simulated 300 s step would breach the hard temperature bounds or the
// node ordering.  Such interventions mark the hour as flagged.
struct DispatchPlan {
  std::vector<int> ewh_low_on, ewh_up_on, erh_on;  // 12 slots, 0/1
  double requested_low = 0, requested_up = 0, requested_erh = 0;
  double achieved_low = 0, achieved_up = 0, achieved_erh = 0;
  bool flagged_low = false, flagged_up = false;
  int forced_on_slots = 0, forced_off_slots = 0;
  EwhState ewh_end;
  double erh_t_in_end = 0;
  std::vector<std::string> violations;  // unavoidable breaches, with magnitude
};

DispatchPlan dispatch_5min(const EwhModel* ewh, EwhState ewh_state, const ErhModel* erh,
                           double erh_t_in, double duty_low, double duty_up, double duty_erh,
                           const std::vector<double>& draws_5min,
                           const std::vector<double>& t_out_5min,
                           const std::vector<double>& irr_5min);

// Outcome of one full simulated run over the controlled days.
struct RunReport {
  std::string name;
  int steps = 0;
  int days = 0;
  double iid_mi_bits = 0, markov_mi_bits = 0, entropy_x_bits = 0;
  double total_cost_cents = 0, avg_daily_cost_cents = 0;
  int comfort_violation_count = 0;
  double comfort_violation_max = 0;  // °C beyond the dead-band
  int solver_failures = 0, fallback_steps = 0;
  long long total_nodes = 0;
  double max_kkt_primal = 0, max_kkt_stationarity = 0, max_kkt_complementarity = 0;
  double projection_magnitude_max = 0;
  int dispatch_flagged_hours = 0;
  double max_unflagged_duty_deviation = 0;

  TimeGrid controlled_grid;  // the scored steps
  BinningScheme binning;     // the exact bins the run was scored with
  std::vector<double> x, y, s_ess, p_charge, p_discharge, energy;
  std::vector<double> s_ewh, duty_ewh_low, duty_ewh_up, t_ewh_low, t_ewh_up;
  std::vector<double> s_erh, duty_erh, t_erh_in;
  std::vector<double> obj_cost, obj_privacy, obj_comfort;  // per-step plan objective parts
  std::vector<int> fallback_flags;  // 1 where passthrough was used
  std::vector<int> dispatch_flags;  // 1 where the dispatcher had to deviate
};

// Runs the controller over the bundle: the first history_window hours
// seed the scoring window with y = x (pre-protection household), the
// next days·24 hours are controlled and scored, and at least one more
// day must remain for lookahead.
RunReport run_receding_horizon(const ScenarioConfig& cfg, const ProfileBundle& profiles);

// Binning used for a run: x binned over [0, max observed x], y over the
// configured range.
BinningScheme run_binning(const ScenarioConfig& cfg, const std::vector<double>& x_full);

// Re-checks a finished run against the device models from scratch:
// power-balance exactness, bounds, store recursion, and (for hourly
// simulation) temperature recursion replays.  Returns the worst
// violation found.
struct AuditResult {
  double max_violation = 0;
  double max_balance_error = 0;  // |y − x − ΣS|, exact-zero expectation
  std::vector<std::string> notes;
};

AuditResult audit_run(const ScenarioConfig& cfg, const ProfileBundle& profiles,
                      const RunReport& report);

}  // namespace privshape
