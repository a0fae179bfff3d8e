#include "privshape/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "privshape/mi_metrics.hpp"

namespace privshape {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("controller: " + msg);
}

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

MiqpOptions solver_options(const ScenarioConfig& cfg) {
  MiqpOptions opts;
  opts.qp.max_iter = cfg.solver_max_iter;
  opts.qp.eps_abs = cfg.solver_eps;
  opts.qp.eps_rel = cfg.solver_eps;
  opts.node_limit = cfg.node_limit;
  opts.comp_tol = cfg.kkt_tol;
  return opts;
}

}  // namespace

BinningScheme run_binning(const ScenarioConfig& cfg, const std::vector<double>& x_full) {
  double x_hi = 0;
  for (double v : x_full) x_hi = std::max(x_hi, v);
  if (!(x_hi > 0)) x_hi = 1.0;
  return BinningScheme{Bins{0.0, x_hi, cfg.x_bins}, Bins{cfg.y_min, cfg.y_max, cfg.y_bins}};
}

StepProgram build_step_program(const ControlState& state, const Forecasts& fc,
                               const ScenarioConfig& cfg, bool use_ess, bool use_ewh,
                               bool use_erh, const BinningScheme& binning) {
  const int H = cfg.horizon;
  if (static_cast<int>(fc.x.size()) != H || static_cast<int>(fc.hour_of_day.size()) != H)
    fail("forecast length does not match the horizon");
  StepProgram sp;
  sp.has_ess = use_ess;
  sp.has_ewh = use_ewh;
  sp.has_erh = use_erh;
  QuadraticProgram& qp = sp.qp;

  sp.y = qp.add_vars(H, cfg.y_min, cfg.y_max);

  // Horizon-averaged tariff term; the cost-blind mode keeps the term at
  // zero coefficients so report columns stay uniform.
  if (cfg.include_energy_cost) {
    for (int t = 0; t < H; ++t)
      qp.add_linear(sp.y[t], cfg.tariff.price_at_hour(fc.hour_of_day[t]) / H);
  }

  if (use_ess) {
    if (!cfg.ess) fail("storage requested but not configured");
    sp.ess = ess_constraints(qp, *cfg.ess, H, 1.0, state.ess_energy);
    for (int t = 0; t < H; ++t)
      sp.pairs.push_back({sp.ess.binary[t], sp.ess.p_charge[t], sp.ess.p_discharge[t],
                          cfg.ess->charge_limit_kw, cfg.ess->discharge_limit_kw});
  }
  if (use_ewh) {
    if (!cfg.ewh) fail("water heater requested but not configured");
    if (static_cast<int>(fc.draws.size()) != H) fail("draw forecast missing");
    const double ambient = use_erh && cfg.erh ? cfg.erh->t_set : cfg.ewh->t_indoor;
    std::vector<double> t_indoor(H, ambient);
    sp.ewh = ewh_constraints(qp, *cfg.ewh, H, 3600.0, fc.draws, t_indoor, state.ewh);
  }
  if (use_erh) {
    if (!cfg.erh) fail("space heater requested but not configured");
    if (static_cast<int>(fc.t_out.size()) != H || static_cast<int>(fc.irradiance.size()) != H)
      fail("weather forecast missing");
    sp.erh = erh_constraints(qp, *cfg.erh, H, fc.t_out, fc.irradiance, state.erh_t_in);
  }

  // Power balance: y = x + S, one equality per step.
  for (int t = 0; t < H; ++t) {
    const int row = qp.add_row(fc.x[t], fc.x[t]);
    qp.row_term(row, sp.y[t], 1.0);
    if (use_ess) {
      qp.row_term(row, sp.ess.p_charge[t], -1.0);
      qp.row_term(row, sp.ess.p_discharge[t], 1.0);
    }
    if (use_ewh) {
      qp.row_term(row, sp.ewh.duty_low[t], -cfg.ewh->rated_kw);
      qp.row_term(row, sp.ewh.duty_up[t], -cfg.ewh->rated_kw);
    }
    if (use_erh) qp.row_term(row, sp.erh.duty[t], -cfg.erh->rated_kw);
  }

  // Shared comfort slack with quadratic penalty.
  if (use_ewh || use_erh) {
    sp.comfort_slack = qp.add_vars(H, 0.0, kQpInf);
    if (use_ewh) ewh_comfort_rows(qp, *cfg.ewh, sp.ewh, sp.comfort_slack);
    if (use_erh) erh_comfort_rows(qp, *cfg.erh, sp.erh, sp.comfort_slack);
    for (int t = 0; t < H; ++t) qp.add_quad(sp.comfort_slack[t], sp.comfort_slack[t], 2.0 * cfg.rho);
  }

  // Privacy surrogate; skipped entirely when its weight is zero so the
  // bin-linking rows never constrain a purely cost-driven plan.
  if (cfg.mu > 0) {
    sp.has_privacy = true;
    HistogramConstants hc = update_constants(state.hist_x, state.hist_y, binning,
                                             cfg.control_eps, cfg.history_window);
    sp.mi_program = build_mi_program(fc.x, hc, binning, cfg.link_margin);
    sp.mi_vars = add_mi_program(qp, sp.mi_program, sp.y, cfg.mu);
  }
  return sp;
}

namespace {

// Extracts, clamps and commits the first-step decisions so the stored
// values respect device bounds exactly and the power balance holds
// bit-for-bit as x + s_store + s_water + s_space.
void commit_first_step(const StepProgram& sp, const ScenarioConfig& cfg,
                       const std::vector<double>& sol, double x0, ControlStepResult& out) {
  double pc = 0, pd = 0, ul = 0, uu = 0, ue = 0;
  if (sp.has_ess) {
    pc = clampd(sol[sp.ess.p_charge[0]], 0.0, cfg.ess->charge_limit_kw);
    pd = clampd(sol[sp.ess.p_discharge[0]], 0.0, cfg.ess->discharge_limit_kw);
    if (pc > 0 && pd > 0) {  // keep the committed step strictly one-sided
      if (pc >= pd)
        pd = 0;
      else
        pc = 0;
    }
  }
  if (sp.has_ewh) {
    ul = clampd(sol[sp.ewh.duty_low[0]], 0.0, 1.0);
    uu = clampd(sol[sp.ewh.duty_up[0]], 0.0, 1.0);
    const double total = ul + uu;
    if (total > 1.0) {
      ul /= total;
      uu /= total;
    }
  }
  if (sp.has_erh) ue = clampd(sol[sp.erh.duty[0]], 0.0, 1.0);

  // Shave any numerical overshoot beyond the meter range by scaling the
  // offending contributions down.  The targets sit a hair inside the
  // range so the rescaled sum cannot round back across an edge.
  for (int guard = 0; guard < 4; ++guard) {
    const double s_ess = pc - pd;
    const double s_ewh = sp.has_ewh ? cfg.ewh->rated_kw * (ul + uu) : 0.0;
    const double s_erh = sp.has_erh ? cfg.erh->rated_kw * ue : 0.0;
    const double y = ((x0 + s_ess) + s_ewh) + s_erh;
    if (y > cfg.y_max && (pc > 0 || ul > 0 || uu > 0 || ue > 0)) {
      const double pos = pc + (sp.has_ewh ? cfg.ewh->rated_kw * (ul + uu) : 0.0) +
                         (sp.has_erh ? cfg.erh->rated_kw * ue : 0.0);
      const double target = cfg.y_max - 1e-10;
      const double scale = std::max(0.0, (pos - (y - target)) / pos);
      pc *= scale;
      ul *= scale;
      uu *= scale;
      ue *= scale;
      continue;
    }
    if (y < cfg.y_min && pd > 0) {
      const double target = cfg.y_min + 1e-10;
      const double scale = std::max(0.0, (pd - (target - y)) / pd);
      pd *= scale;
      continue;
    }
    break;
  }

  out.p_charge = pc;
  out.p_discharge = pd;
  out.s_ess = pc - pd;
  out.duty_ewh_low = ul;
  out.duty_ewh_up = uu;
  out.s_ewh = sp.has_ewh ? cfg.ewh->rated_kw * (ul + uu) : 0.0;
  out.duty_erh = ue;
  out.s_erh = sp.has_erh ? cfg.erh->rated_kw * ue : 0.0;
  out.x = x0;
  out.y = ((x0 + out.s_ess) + out.s_ewh) + out.s_erh;
}

ControlStepResult passthrough_step(double x0, SolveStatus status) {
  ControlStepResult out;
  out.x = x0;
  out.y = ((x0 + 0.0) + 0.0) + 0.0;
  out.status = status;
  out.fallback = true;
  return out;
}

ControlStepResult solve_step(const ControlState& state, const Forecasts& fc,
                             const ScenarioConfig& cfg, bool use_ess, bool use_ewh, bool use_erh,
                             const BinningScheme& binning) {
  StepProgram sp = build_step_program(state, fc, cfg, use_ess, use_ewh, use_erh, binning);
  MiqpResult sol = solve_miqp(sp.qp, sp.pairs, solver_options(cfg));
  if (!sol.incumbent_found || sol.status == SolveStatus::infeasible) {
    return passthrough_step(fc.x[0], sol.status);
  }

  ControlStepResult out;
  out.status = sol.status;
  out.nodes = sol.nodes_explored;
  out.kkt = sol.kkt;
  out.gap = (sol.objective - sol.best_bound) / std::max(1.0, std::abs(sol.objective));
  out.projection_magnitude = sp.has_privacy ? sp.mi_program.projection_magnitude : 0.0;
  commit_first_step(sp, cfg, sol.x, fc.x[0], out);

  const int H = cfg.horizon;
  out.plan_y.resize(H);
  for (int t = 0; t < H; ++t) out.plan_y[t] = sol.x[sp.y[t]];

  // Objective breakdown at the solved plan.
  if (cfg.include_energy_cost) {
    double c = 0;
    for (int t = 0; t < H; ++t)
      c += cfg.tariff.price_at_hour(fc.hour_of_day[t]) * sol.x[sp.y[t]];
    out.objective.cost = c / H;
  }
  if (use_ewh || use_erh) {
    double s2 = 0;
    for (int t = 0; t < H; ++t) {
      const double s = std::max(0.0, sol.x[sp.comfort_slack[t]]);
      s2 += s * s;
    }
    out.objective.comfort = cfg.rho * s2;
  }
  if (sp.has_privacy) {
    const int n = sp.mi_program.n_bins;
    std::vector<double> z(static_cast<std::size_t>(H) * n, 0.0);
    for (int t = 0; t < H; ++t) {
      double sum = 0;
      for (int j = 0; j < n; ++j) {
        const double v = clampd(sol.x[sp.mi_vars.z[t * n + j]], 0.0, 1.0);
        z[static_cast<std::size_t>(t) * n + j] = v;
        sum += v;
      }
      if (sum > 0)
        for (int j = 0; j < n; ++j) z[static_cast<std::size_t>(t) * n + j] /= sum;
      else
        z[static_cast<std::size_t>(t) * n] = 1.0;
    }
    out.objective.privacy = cfg.mu * evaluate_via_coefficients(sp.mi_program, z);
  }
  out.objective.total = out.objective.cost + out.objective.privacy + out.objective.comfort;
  return out;
}

}  // namespace

ControlStepResult plan_step_ess(const ControlState& state, const Forecasts& fc,
                                const ScenarioConfig& cfg, const BinningScheme& binning) {
  return solve_step(state, fc, cfg, true, false, false, binning);
}

ControlStepResult plan_step_ftl(const ControlState& state, const Forecasts& fc,
                                const ScenarioConfig& cfg, bool use_ewh, bool use_erh,
                                const BinningScheme& binning) {
  if (!use_ewh && !use_erh) fail("flexible-load planning needs at least one thermal device");
  return solve_step(state, fc, cfg, false, use_ewh, use_erh, binning);
}

DispatchPlan dispatch_5min(const EwhModel* ewh, EwhState ewh_state, const ErhModel* erh,
                           double erh_t_in, double duty_low, double duty_up, double duty_erh,
                           const std::vector<double>& draws_5min,
                           const std::vector<double>& t_out_5min,
                           const std::vector<double>& irr_5min) {
  constexpr int kSlots = 12;
  constexpr double kDt = 300.0;
  DispatchPlan plan;
  plan.ewh_low_on.assign(kSlots, 0);
  plan.ewh_up_on.assign(kSlots, 0);
  plan.erh_on.assign(kSlots, 0);
  plan.requested_low = duty_low;
  plan.requested_up = duty_up;
  plan.requested_erh = duty_erh;
  plan.erh_t_in_end = erh_t_in;
  plan.ewh_end = ewh_state;

  if (ewh && static_cast<int>(draws_5min.size()) != kSlots) fail("dispatch needs 12 draw slots");
  if (erh &&
      (static_cast<int>(t_out_5min.size()) != kSlots || static_cast<int>(irr_5min.size()) != kSlots))
    fail("dispatch needs 12 weather slots");

  int remaining_low = ewh ? static_cast<int>(std::llround(duty_low * kSlots)) : 0;
  int remaining_up = ewh ? static_cast<int>(std::llround(duty_up * kSlots)) : 0;
  int remaining_erh = erh ? static_cast<int>(std::llround(duty_erh * kSlots)) : 0;

  double t_in = erh_t_in;
  EwhState st = ewh_state;
  for (int s = 0; s < kSlots; ++s) {
    const double ambient = erh ? t_in : (ewh ? ewh->t_indoor : 0.0);
    int on_up = 0, on_low = 0;
    if (ewh) {
      // Hourly rates carry litres/h; one slot draws a twelfth of that.
      const double slot_litres = draws_5min[s] * (kDt / 3600.0);
      if (remaining_up > 0) {
        const EwhStepResult trial = ewh_step(*ewh, st, ambient, slot_litres, 0.0, 1.0, kDt);
        if (trial.state.t_up > ewh->t_absmax + 1e-9 ||
            trial.state.t_low > trial.state.t_up + 1e-9) {
          ++plan.forced_off_slots;  // defer: a later, cooler slot may accept it
        } else {
          on_up = 1;
          --remaining_up;
        }
      }
      if (remaining_low > 0 && on_up == 0) {
        const EwhStepResult trial = ewh_step(*ewh, st, ambient, slot_litres, 1.0, 0.0, kDt);
        if (trial.state.t_low > trial.state.t_up + 1e-9 ||
            trial.state.t_up > ewh->t_absmax + 1e-9) {
          ++plan.forced_off_slots;
        } else {
          on_low = 1;
          --remaining_low;
        }
      }
      if (on_up == 0) {
        // Keep the tank safe: if this slot would sink below the hard
        // floor, run the upper element regardless of the target.
        const EwhStepResult trial =
            ewh_step(*ewh, st, ambient, slot_litres, static_cast<double>(on_low), 0.0, kDt);
        if (trial.state.t_up < ewh->t_absmin - 1e-9) {
          on_up = 1;
          on_low = 0;
          ++plan.forced_on_slots;
          const EwhStepResult forced = ewh_step(*ewh, st, ambient, slot_litres, 0.0, 1.0, kDt);
          if (forced.state.t_up < ewh->t_absmin - 1e-9) {
            std::ostringstream msg;
            msg << "slot " << s << ": upper node " << forced.state.t_up
                << " degC below floor even at full power (deficit "
                << (ewh->t_absmin - forced.state.t_up) << " degC)";
            plan.violations.push_back(msg.str());
          }
        }
      }
      const EwhStepResult step = ewh_step(*ewh, st, ambient, slot_litres,
                                          static_cast<double>(on_low),
                                          static_cast<double>(on_up), kDt);
      st = step.state;
      plan.ewh_low_on[s] = on_low;
      plan.ewh_up_on[s] = on_up;
    }
    if (erh) {
      const int on = remaining_erh > 0 ? 1 : 0;
      if (on) --remaining_erh;
      plan.erh_on[s] = on;
      t_in = erh_substep(*erh, t_in, t_out_5min[s], irr_5min[s],
                         static_cast<double>(on), kDt);
    }
  }

  int n_low = 0, n_up = 0, n_erh = 0;
  for (int s = 0; s < kSlots; ++s) {
    n_low += plan.ewh_low_on[s];
    n_up += plan.ewh_up_on[s];
    n_erh += plan.erh_on[s];
  }
  plan.achieved_low = static_cast<double>(n_low) / kSlots;
  plan.achieved_up = static_cast<double>(n_up) / kSlots;
  plan.achieved_erh = static_cast<double>(n_erh) / kSlots;
  const int target_low = static_cast<int>(std::llround(duty_low * kSlots));
  const int target_up = static_cast<int>(std::llround(duty_up * kSlots));
  plan.flagged_low = (n_low != target_low);
  plan.flagged_up = (n_up != target_up) || plan.forced_on_slots > 0 || plan.forced_off_slots > 0;
  // A forced decision on either element can displace the other; treat any
  // forced slot as flagging both elements' hour.
  if (plan.forced_on_slots > 0 || plan.forced_off_slots > 0) plan.flagged_low = true;
  plan.ewh_end = st;
  plan.erh_t_in_end = t_in;
  return plan;
}

RunReport run_receding_horizon(const ScenarioConfig& cfg, const ProfileBundle& profiles) {
  const int W = cfg.history_window;
  const int H = cfg.horizon;
  const int n_ctrl = cfg.days * 24;
  const std::size_t need = static_cast<std::size_t>(W) + n_ctrl + H - 1;
  if (profiles.x.size() < need)
    fail("profiles cover " + std::to_string(profiles.x.size()) + " hours but " +
         std::to_string(need) + " are needed (history + days + lookahead)");
  if (profiles.hourly.step_seconds != 3600) fail("control expects an hourly grid");
  const bool use_ess = cfg.ess.has_value();
  const bool use_ewh = cfg.ewh.has_value();
  const bool use_erh = cfg.erh.has_value();
  if (use_ewh && profiles.draws.size() < need) fail("draw series too short");
  if (use_erh && (profiles.t_out.size() < need || profiles.irradiance.size() < need))
    fail("weather series too short");
  if (cfg.step_load && (use_ewh || use_erh) && !profiles.has_5min)
    fail("stepped simulation needs 5-minute companion series");

  const BinningScheme binning = run_binning(cfg, profiles.x);

  ControlState state;
  state.hist_x.assign(profiles.x.begin(), profiles.x.begin() + W);
  state.hist_y = state.hist_x;  // pre-protection household: y was x
  if (use_ess) state.ess_energy = cfg.ess->initial_energy();
  if (use_ewh) state.ewh = EwhState{cfg.ewh->t_set, cfg.ewh->t_set};
  if (use_erh) state.erh_t_in = cfg.erh->t_set;

  RunReport rep;
  rep.name = cfg.name;
  rep.days = cfg.days;
  rep.steps = n_ctrl;
  rep.binning = binning;
  rep.controlled_grid = TimeGrid{profiles.hourly.at(W), 3600, static_cast<std::size_t>(n_ctrl)};
  const auto reserve = [n_ctrl](std::vector<double>& v) { v.reserve(n_ctrl); };
  reserve(rep.x);
  reserve(rep.y);
  reserve(rep.s_ess);
  reserve(rep.p_charge);
  reserve(rep.p_discharge);
  reserve(rep.energy);
  reserve(rep.s_ewh);
  reserve(rep.duty_ewh_low);
  reserve(rep.duty_ewh_up);
  reserve(rep.t_ewh_low);
  reserve(rep.t_ewh_up);
  reserve(rep.s_erh);
  reserve(rep.duty_erh);
  reserve(rep.t_erh_in);

  for (int step = 0; step < n_ctrl; ++step) {
    const std::size_t w = static_cast<std::size_t>(W) + step;
    Forecasts fc;
    fc.x.assign(profiles.x.begin() + w, profiles.x.begin() + w + H);
    if (use_ewh) fc.draws.assign(profiles.draws.begin() + w, profiles.draws.begin() + w + H);
    if (use_erh) {
      fc.t_out.assign(profiles.t_out.begin() + w, profiles.t_out.begin() + w + H);
      fc.irradiance.assign(profiles.irradiance.begin() + w,
                           profiles.irradiance.begin() + w + H);
    }
    fc.hour_of_day.resize(H);
    for (int t = 0; t < H; ++t) fc.hour_of_day[t] = hour_of_day(profiles.hourly.at(w + t));

    ControlStepResult res;
    if (!use_ess && !use_ewh && !use_erh) {
      res = passthrough_step(fc.x[0], SolveStatus::optimal);
      res.fallback = false;  // passthrough IS the plan for a deviceless run
    } else {
      res = solve_step(state, fc, cfg, use_ess, use_ewh, use_erh, binning);
    }

    if (res.fallback) {
      ++rep.fallback_steps;
      if (res.status != SolveStatus::optimal) ++rep.solver_failures;
    } else if (res.status != SolveStatus::optimal) {
      ++rep.solver_failures;
    }
    rep.total_nodes += res.nodes;
    rep.max_kkt_primal = std::max(rep.max_kkt_primal, res.kkt.primal);
    rep.max_kkt_stationarity = std::max(rep.max_kkt_stationarity, res.kkt.stationarity);
    rep.max_kkt_complementarity = std::max(rep.max_kkt_complementarity, res.kkt.complementarity);
    rep.projection_magnitude_max =
        std::max(rep.projection_magnitude_max, res.projection_magnitude);

    // Simulate the committed hour on realized inputs.
    double committed_y = res.y;
    double s_ewh = res.s_ewh, s_erh = res.s_erh;
    double duty_low = res.duty_ewh_low, duty_up = res.duty_ewh_up, duty_e = res.duty_erh;
    int dispatch_flag = 0;
    const double ambient_for_tank = use_erh ? state.erh_t_in
                                            : (use_ewh ? cfg.ewh->t_indoor : 0.0);
    if (cfg.step_load && (use_ewh || use_erh)) {
      std::vector<double> d5, t5, i5;
      const std::size_t base = w * 12;
      if (use_ewh)
        d5.assign(profiles.draws_5min.begin() + base, profiles.draws_5min.begin() + base + 12);
      if (use_erh) {
        t5.assign(profiles.t_out_5min.begin() + base, profiles.t_out_5min.begin() + base + 12);
        i5.assign(profiles.irradiance_5min.begin() + base,
                  profiles.irradiance_5min.begin() + base + 12);
      }
      DispatchPlan plan =
          dispatch_5min(use_ewh ? &*cfg.ewh : nullptr, state.ewh,
                        use_erh ? &*cfg.erh : nullptr, state.erh_t_in, duty_low, duty_up,
                        duty_e, d5, t5, i5);
      duty_low = plan.achieved_low;
      duty_up = plan.achieved_up;
      duty_e = plan.achieved_erh;
      s_ewh = use_ewh ? cfg.ewh->rated_kw * (duty_low + duty_up) : 0.0;
      s_erh = use_erh ? cfg.erh->rated_kw * duty_e : 0.0;
      committed_y = ((res.x + res.s_ess) + s_ewh) + s_erh;
      if (plan.flagged_low || plan.flagged_up) {
        dispatch_flag = 1;
        ++rep.dispatch_flagged_hours;
      } else {
        rep.max_unflagged_duty_deviation =
            std::max({rep.max_unflagged_duty_deviation,
                      std::abs(plan.achieved_low - plan.requested_low),
                      std::abs(plan.achieved_up - plan.requested_up)});
      }
      if (use_ewh) state.ewh = plan.ewh_end;
      if (use_erh) state.erh_t_in = plan.erh_t_in_end;
    } else {
      if (use_erh)
        state.erh_t_in = erh_step(*cfg.erh, state.erh_t_in, profiles.t_out[w],
                                  profiles.irradiance[w], duty_e);
      if (use_ewh) {
        const EwhStepResult sim = ewh_step(*cfg.ewh, state.ewh, ambient_for_tank,
                                           profiles.draws[w], duty_low, duty_up, 3600.0);
        state.ewh = sim.state;
      }
    }
    if (use_ess) {
      state.ess_energy = clampd(
          cfg.ess->step_energy(state.ess_energy, res.p_charge, res.p_discharge, 1.0), 0.0,
          cfg.ess->capacity_kwh);
    }

    // Comfort accounting on realized temperatures.
    double violation = 0;
    if (use_ewh) violation = std::max(violation, ewh_comfort_slack(*cfg.ewh, state.ewh));
    if (use_erh) {
      const double dev = std::max({0.0, (cfg.erh->t_set - 1.0) - state.erh_t_in,
                                   state.erh_t_in - (cfg.erh->t_set + 1.0)});
      violation = std::max(violation, dev);
    }
    if (violation > 1e-9) {
      ++rep.comfort_violation_count;
      rep.comfort_violation_max = std::max(rep.comfort_violation_max, violation);
    }

    rep.obj_cost.push_back(res.objective.cost);
    rep.obj_privacy.push_back(res.objective.privacy);
    rep.obj_comfort.push_back(res.objective.comfort);
    rep.x.push_back(res.x);
    rep.y.push_back(committed_y);
    rep.s_ess.push_back(res.s_ess);
    rep.p_charge.push_back(res.p_charge);
    rep.p_discharge.push_back(res.p_discharge);
    rep.energy.push_back(use_ess ? state.ess_energy : 0.0);
    rep.s_ewh.push_back(s_ewh);
    rep.duty_ewh_low.push_back(duty_low);
    rep.duty_ewh_up.push_back(duty_up);
    rep.t_ewh_low.push_back(state.ewh.t_low);
    rep.t_ewh_up.push_back(state.ewh.t_up);
    rep.s_erh.push_back(s_erh);
    rep.duty_erh.push_back(duty_e);
    rep.t_erh_in.push_back(state.erh_t_in);
    rep.fallback_flags.push_back(res.fallback ? 1 : 0);
    rep.dispatch_flags.push_back(dispatch_flag);

    state.hist_x.erase(state.hist_x.begin());
    state.hist_y.erase(state.hist_y.begin());
    state.hist_x.push_back(res.x);
    state.hist_y.push_back(committed_y);
  }

  const MiReport mi = score_pair(rep.x, rep.y, binning, cfg.score_eps);
  rep.iid_mi_bits = mi.iid_mi_bits;
  rep.markov_mi_bits = mi.markov_mi_bits;
  rep.entropy_x_bits = mi.entropy_x_bits;
  LoadProfile yp(rep.controlled_grid, ProfileRole::grid_load, rep.y);
  rep.total_cost_cents = energy_cost(yp, cfg.tariff);
  rep.avg_daily_cost_cents = cfg.days > 0 ? rep.total_cost_cents / cfg.days : 0.0;
  return rep;
}

AuditResult audit_run(const ScenarioConfig& cfg, const ProfileBundle& profiles,
                      const RunReport& report) {
  AuditResult audit;
  const int W = cfg.history_window;
  const bool use_ess = cfg.ess.has_value();
  const bool use_ewh = cfg.ewh.has_value();
  const bool use_erh = cfg.erh.has_value();
  const int n = report.steps;
  auto hit = [&audit](double v, const std::string& what, int step) {
    if (v > audit.max_violation) audit.max_violation = v;
    if (v > 1e-6) {
      std::ostringstream msg;
      msg << what << " violated by " << v << " at step " << step;
      audit.notes.push_back(msg.str());
    }
  };

  double prev_e = use_ess ? cfg.ess->initial_energy() : 0.0;
  EwhState prev_ewh = use_ewh ? EwhState{cfg.ewh->t_set, cfg.ewh->t_set} : EwhState{};
  double prev_tin = use_erh ? cfg.erh->t_set : 0.0;

  for (int t = 0; t < n; ++t) {
    const std::size_t w = static_cast<std::size_t>(W) + t;
    // Exact power balance, summed in the committed order.
    const double bal =
        report.y[t] - (((report.x[t] + report.s_ess[t]) + report.s_ewh[t]) + report.s_erh[t]);
    audit.max_balance_error = std::max(audit.max_balance_error, std::abs(bal));

    if (use_ess) {
      hit(std::max(0.0, -report.p_charge[t]), "charge power floor", t);
      hit(std::max(0.0, report.p_charge[t] - cfg.ess->charge_limit_kw), "charge power cap", t);
      hit(std::max(0.0, -report.p_discharge[t]), "discharge power floor", t);
      hit(std::max(0.0, report.p_discharge[t] - cfg.ess->discharge_limit_kw),
          "discharge power cap", t);
      hit(std::abs(report.p_charge[t] * report.p_discharge[t]), "one-sided store use", t);
      const double expect = cfg.ess->step_energy(prev_e, report.p_charge[t],
                                                 report.p_discharge[t], 1.0);
      hit(std::abs(report.energy[t] - std::min(std::max(expect, 0.0), cfg.ess->capacity_kwh)),
          "store energy recursion", t);
      hit(std::max(0.0, -report.energy[t]), "store energy floor", t);
      hit(std::max(0.0, report.energy[t] - cfg.ess->capacity_kwh), "store energy cap", t);
      prev_e = report.energy[t];
    }
    if (use_ewh) {
      hit(std::max(0.0, -report.duty_ewh_low[t]), "lower duty floor", t);
      hit(std::max(0.0, report.duty_ewh_low[t] - 1.0), "lower duty cap", t);
      hit(std::max(0.0, -report.duty_ewh_up[t]), "upper duty floor", t);
      hit(std::max(0.0, report.duty_ewh_up[t] - 1.0), "upper duty cap", t);
      hit(std::max(0.0, report.duty_ewh_low[t] + report.duty_ewh_up[t] - 1.0),
          "element exclusivity", t);
      if (!cfg.step_load) {
        const double ambient = use_erh ? prev_tin : cfg.ewh->t_indoor;
        const EwhStepResult sim = ewh_step(*cfg.ewh, prev_ewh, ambient, profiles.draws[w],
                                           report.duty_ewh_low[t], report.duty_ewh_up[t], 3600.0);
        hit(std::abs(sim.state.t_low - report.t_ewh_low[t]), "lower temperature recursion", t);
        hit(std::abs(sim.state.t_up - report.t_ewh_up[t]), "upper temperature recursion", t);
        if (report.fallback_flags[t] == 0) {
          hit(std::max(0.0, report.t_ewh_up[t] - cfg.ewh->t_absmax), "upper temperature cap", t);
          hit(std::max(0.0, cfg.ewh->t_absmin - report.t_ewh_up[t]), "upper temperature floor", t);
        }
      }
      prev_ewh = EwhState{report.t_ewh_low[t], report.t_ewh_up[t]};
    }
    if (use_erh) {
      hit(std::max(0.0, -report.duty_erh[t]), "space-heat duty floor", t);
      hit(std::max(0.0, report.duty_erh[t] - 1.0), "space-heat duty cap", t);
      if (!cfg.step_load) {
        const double sim = erh_step(*cfg.erh, prev_tin, profiles.t_out[w],
                                    profiles.irradiance[w], report.duty_erh[t]);
        hit(std::abs(sim - report.t_erh_in[t]), "indoor temperature recursion", t);
      }
      prev_tin = report.t_erh_in[t];
    }
    if (!use_ess) {
      // Add-only devices can never pull the visible load below the
      // sensitive load.
      if (report.y[t] < report.x[t]) hit(report.x[t] - report.y[t], "no-discharge property", t);
    }
  }
  return audit;
}

}  // namespace privshape
