#pragma once
// Device models and their constraint emitters: battery storage (ESS),
// two-node electric water heater (EWH), and electric resistance space
// heater (ERH), plus the shared comfort-slack hinge rows.
//
// Each device offers (a) pure state-update functions used by simulation and
// dispatch, and (b) emitters that append the device's operating envelope to a
// QuadraticProgram over a planning horizon (temperatures affine in duties).

#include <vector>

#include "privshape/qp.hpp"

namespace privshape {

// ---------------------------------------------------------------------------
// Battery energy storage system.
// Charging stores eta_charge * P_c; delivering P_d to the house drains
// P_d / eta_discharge from the store, so a full round trip returns
// eta_charge * eta_discharge of the energy charged.
struct EssModel {
  double capacity_kwh = 6.29;
  double charge_limit_kw = 5.5;
  double discharge_limit_kw = 5.5;
  double eta_charge = 0.96;
  double eta_discharge = 0.96;
  double initial_soc = 0.5;  // fraction of capacity at run start

  double round_trip_loss() const { return 1.0 - eta_charge * eta_discharge; }
  double initial_energy() const { return initial_soc * capacity_kwh; }
  double step_energy(double energy, double p_charge, double p_discharge, double dt_hours) const {
    return energy + dt_hours * (eta_charge * p_charge - p_discharge / eta_discharge);
  }
  bool operator==(const EssModel&) const = default;
};

struct EssVars {
  VarSpan p_charge;     // kW, [0, charge_limit]
  VarSpan p_discharge;  // kW, [0, discharge_limit]
  VarSpan energy;       // kWh post-step, [0, capacity]
  VarSpan binary;       // charge/discharge mode, binary in the integer problem
};

// Emits gating rows (P_c <= B*P_c_max, P_d <= (1-B)*P_d_max), energy bounds
// and the energy-balance equalities for `horizon` steps starting from e0.
// The grid-side coupling S_t = p_charge[t] - p_discharge[t] is left to the
// caller's power-balance rows.
EssVars ess_constraints(QuadraticProgram& qp, const EssModel& model, int horizon, double dt_hours,
                        double e0);

// ---------------------------------------------------------------------------
// Two-node electric water heater.
struct EwhModel {
  double rated_kw = 5.5;
  double t_absmin = 50.0;
  double t_absmax = 90.0;
  double t_set = 75.0;
  double t_mains = 10.0;
  double cp_kj_per_litre_k = 4.19;
  double c_low_kj_per_k = 356.15;
  double c_up_kj_per_k = 356.15;
  double ua_low_kw_per_k = 5.82e-4;
  double ua_up_kw_per_k = 5.82e-4;
  double tank_litres = 170.0;
  double t_indoor = 20.0;  // ambient around the tank when no indoor series is supplied
  // Upper-node update basis: true reproduces the source model text verbatim
  // (update starts from the lower-node temperature); false uses the
  // self-referencing form.
  bool upper_node_base_low = true;

  double node_litres() const { return tank_litres / 2.0; }
  bool operator==(const EwhModel&) const = default;
};

struct EwhState {
  double t_low = 75.0;
  double t_up = 75.0;
};

struct EwhStepResult {
  EwhState state;
  double clipped_litres = 0.0;  // draw volume beyond one node volume, dropped with a warning
};

// One integration step of both node equations (dt in seconds, draw in litres
// for this step). Temperatures are never clamped; bound violations are the
// caller's to detect and report.
EwhStepResult ewh_step(const EwhModel& model, EwhState state, double t_air_in, double draw_litres,
                       double duty_low, double duty_up, double dt_seconds);

// Comfort hinge around the set-point dead-band of +-1 deg C:
// max(0, (t_set-1) - t_low, t_up - (t_set+1)).
double ewh_comfort_slack(const EwhModel& model, const EwhState& state);

struct EwhVars {
  VarSpan duty_low, duty_up;  // [0,1]
  VarSpan t_low, t_up;        // post-step node temperatures, deg C
  double clipped_litres = 0.0;
};

// Emits affine temperature dynamics (given draw and indoor-temperature
// forecasts), hard upper-node bounds, node ordering and element exclusivity.
// S coupling: rated_kw * (duty_low[t] + duty_up[t]), handled by the caller.
EwhVars ewh_constraints(QuadraticProgram& qp, const EwhModel& model, int horizon, double dt_seconds,
                        const std::vector<double>& draw_litres, const std::vector<double>& t_indoor,
                        EwhState init);

// Hinge rows tying the post-step temperatures to shared slack variables:
// (t_set-1) - t_low[t] <= slack[t], t_up[t] - (t_set+1) <= slack[t].
void ewh_comfort_rows(QuadraticProgram& qp, const EwhModel& model, const EwhVars& vars, VarSpan slack);

// ---------------------------------------------------------------------------
// Electric resistance space heater with learned one-step dynamics.
struct ErhModel {
  double rated_kw = 4.5;
  double t_set = 22.0;
  double gamma1 = 1.50e-2;  // per hourly step: T' = T + g1*(T_out - T) + g2*U*P + g3*irr
  double gamma2 = 1.86e-1;
  double gamma3 = 3.45e-1;

  bool operator==(const ErhModel&) const = default;
};

// Hourly update exactly as fitted.
double erh_step(const ErhModel& model, double t_in, double t_out, double irr, double duty);
// Sub-hourly integration for dispatch simulation: the fitted hourly gains are
// scaled by dt_seconds/3600.
double erh_substep(const ErhModel& model, double t_in, double t_out, double irr, double duty,
                   double dt_seconds);

// Weighted comfort hinge: 10 * max(0, (t_set-1) - t_in, t_in - (t_set+1)).
double erh_comfort_slack(const ErhModel& model, double t_in);

struct ErhVars {
  VarSpan duty;  // [0,1]
  VarSpan t_in;  // post-step indoor temperature
};

ErhVars erh_constraints(QuadraticProgram& qp, const ErhModel& model, int horizon,
                        const std::vector<double>& t_out, const std::vector<double>& irr, double t0);

// Hinge rows with the x10 indoor-comfort weight against the shared slack.
void erh_comfort_rows(QuadraticProgram& qp, const ErhModel& model, const ErhVars& vars, VarSpan slack);

}  // namespace privshape
