#include "privshape/devices.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace privshape {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite ") + what);
}
}  // namespace

EssVars ess_constraints(QuadraticProgram& qp, const EssModel& model, int horizon, double dt_hours,
                        double e0) {
  EssVars v;
  v.p_charge = qp.add_vars(horizon, 0.0, model.charge_limit_kw);
  v.p_discharge = qp.add_vars(horizon, 0.0, model.discharge_limit_kw);
  v.energy = qp.add_vars(horizon, 0.0, model.capacity_kwh);
  v.binary = qp.add_vars(horizon, 0.0, 1.0);
  for (int t = 0; t < horizon; ++t) {
    qp.binaries.push_back(v.binary[t]);
    // Mode gating: p_charge <= B * limit, p_discharge <= (1 - B) * limit.
    qp.add_row(-kInf, 0.0, {{v.p_charge[t], 1.0}, {v.binary[t], -model.charge_limit_kw}});
    qp.add_row(-kInf, model.discharge_limit_kw,
               {{v.p_discharge[t], 1.0}, {v.binary[t], model.discharge_limit_kw}});
    // Energy balance: E_t - E_{t-1} - dt*(eta_c*Pc_t - Pd_t/eta_d) = 0.
    const double rhs = (t == 0) ? e0 : 0.0;
    const int row = qp.add_row(rhs, rhs);
    qp.row_term(row, v.energy[t], 1.0);
    if (t > 0) qp.row_term(row, v.energy[t - 1], -1.0);
    qp.row_term(row, v.p_charge[t], -dt_hours * model.eta_charge);
    qp.row_term(row, v.p_discharge[t], dt_hours / model.eta_discharge);
  }
  return v;
}

EwhStepResult ewh_step(const EwhModel& model, EwhState state, double t_air_in, double draw_litres,
                       double duty_low, double duty_up, double dt_seconds) {
  check_finite(state.t_low, "lower-node temperature");
  check_finite(state.t_up, "upper-node temperature");
  check_finite(t_air_in, "indoor temperature");
  check_finite(draw_litres, "draw volume");
  if (draw_litres < 0.0) throw std::runtime_error("negative hot-water draw");

  EwhStepResult res;
  const double node = model.node_litres();
  double dm = draw_litres;
  if (dm > node) {
    res.clipped_litres = dm - node;
    dm = node;
  }
  const double cp = model.cp_kj_per_litre_k;
  const double p_kw = model.rated_kw;

  // Lower node: ambient loss, mains-water mixing, element power.
  res.state.t_low = state.t_low + (dt_seconds * model.ua_low_kw_per_k * (t_air_in - state.t_low) +
                                   dm * cp * (model.t_mains - state.t_low) +
                                   dt_seconds * p_kw * duty_low) /
                                      model.c_low_kj_per_k;
  // Upper node: mixes with lower-node water on draw. The update basis is the
  // lower-node temperature in the verbatim model form.
  const double base = model.upper_node_base_low ? state.t_low : state.t_up;
  res.state.t_up = base + (dt_seconds * model.ua_up_kw_per_k * (t_air_in - state.t_up) +
                           dm * cp * (state.t_low - state.t_up) + dt_seconds * p_kw * duty_up) /
                              model.c_up_kj_per_k;
  return res;
}

double ewh_comfort_slack(const EwhModel& model, const EwhState& state) {
  const double lower_hinge = (model.t_set - 1.0) - state.t_low;
  const double upper_hinge = state.t_up - (model.t_set + 1.0);
  return std::max(0.0, std::max(lower_hinge, upper_hinge));
}

EwhVars ewh_constraints(QuadraticProgram& qp, const EwhModel& model, int horizon, double dt_seconds,
                        const std::vector<double>& draw_litres, const std::vector<double>& t_indoor,
                        EwhState init) {
  if (model.t_absmin > model.t_absmax) throw std::runtime_error("ewh: T_absmin exceeds T_absmax");
  if (static_cast<int>(draw_litres.size()) < horizon || static_cast<int>(t_indoor.size()) < horizon)
    throw std::runtime_error("ewh: forecasts shorter than horizon");

  EwhVars v;
  v.duty_low = qp.add_vars(horizon, 0.0, 1.0);
  v.duty_up = qp.add_vars(horizon, 0.0, 1.0);
  v.t_low = qp.add_vars(horizon, -kInf, kInf);
  v.t_up = qp.add_vars(horizon, model.t_absmin, model.t_absmax);

  const double cp = model.cp_kj_per_litre_k;
  const double node = model.node_litres();
  for (int t = 0; t < horizon; ++t) {
    double dm = draw_litres[static_cast<std::size_t>(t)];
    if (dm > node) {
      v.clipped_litres += dm - node;
      dm = node;
    }
    const double t_air = t_indoor[static_cast<std::size_t>(t)];

    // t_low[t] = aL * t_low[t-1] + bL * duty_low[t] + kL
    const double a_low = 1.0 - (dt_seconds * model.ua_low_kw_per_k + dm * cp) / model.c_low_kj_per_k;
    const double b_low = dt_seconds * model.rated_kw / model.c_low_kj_per_k;
    const double k_low =
        (dt_seconds * model.ua_low_kw_per_k * t_air + dm * cp * model.t_mains) / model.c_low_kj_per_k;
    {
      const double rhs_const = (t == 0) ? a_low * init.t_low : 0.0;
      const int row = qp.add_row(k_low + rhs_const, k_low + rhs_const);
      qp.row_term(row, v.t_low[t], 1.0);
      if (t > 0) qp.row_term(row, v.t_low[t - 1], -a_low);
      qp.row_term(row, v.duty_low[t], -b_low);
    }

    // t_up[t] = base + cu_up * t_up[t-1] + cu_low_mix * t_low[t-1] + bU * duty_up[t] + kU
    const double mix = dm * cp / model.c_up_kj_per_k;
    const double loss = dt_seconds * model.ua_up_kw_per_k / model.c_up_kj_per_k;
    const double cu_up = (model.upper_node_base_low ? 0.0 : 1.0) - loss - mix;
    const double cu_low = (model.upper_node_base_low ? 1.0 : 0.0) + mix;
    const double b_up = dt_seconds * model.rated_kw / model.c_up_kj_per_k;
    const double k_up = loss * t_air;
    {
      double rhs_const = k_up;
      if (t == 0) rhs_const += cu_up * init.t_up + cu_low * init.t_low;
      const int row = qp.add_row(rhs_const, rhs_const);
      qp.row_term(row, v.t_up[t], 1.0);
      if (t > 0) {
        qp.row_term(row, v.t_up[t - 1], -cu_up);
        qp.row_term(row, v.t_low[t - 1], -cu_low);
      }
      qp.row_term(row, v.duty_up[t], -b_up);
    }

    // Node ordering and element exclusivity.
    qp.add_row(-kInf, 0.0, {{v.t_low[t], 1.0}, {v.t_up[t], -1.0}});
    qp.add_row(-kInf, 1.0, {{v.duty_low[t], 1.0}, {v.duty_up[t], 1.0}});
  }
  return v;
}

void ewh_comfort_rows(QuadraticProgram& qp, const EwhModel& model, const EwhVars& vars, VarSpan slack) {
  for (int t = 0; t < vars.t_low.count; ++t) {
    // (t_set - 1) - t_low <= slack
    qp.add_row(-kInf, -(model.t_set - 1.0), {{vars.t_low[t], -1.0}, {slack[t], -1.0}});
    // t_up - (t_set + 1) <= slack
    qp.add_row(-kInf, model.t_set + 1.0, {{vars.t_up[t], 1.0}, {slack[t], -1.0}});
  }
}

double erh_step(const ErhModel& model, double t_in, double t_out, double irr, double duty) {
  check_finite(t_in, "indoor temperature");
  check_finite(t_out, "outdoor temperature");
  check_finite(irr, "irradiance");
  return t_in + model.gamma1 * (t_out - t_in) + model.gamma2 * duty * model.rated_kw +
         model.gamma3 * irr;
}

double erh_substep(const ErhModel& model, double t_in, double t_out, double irr, double duty,
                   double dt_seconds) {
  const double f = dt_seconds / 3600.0;
  return t_in + f * (model.gamma1 * (t_out - t_in) + model.gamma2 * duty * model.rated_kw +
                     model.gamma3 * irr);
}

double erh_comfort_slack(const ErhModel& model, double t_in) {
  const double lower_hinge = (model.t_set - 1.0) - t_in;
  const double upper_hinge = t_in - (model.t_set + 1.0);
  return 10.0 * std::max(0.0, std::max(lower_hinge, upper_hinge));
}

ErhVars erh_constraints(QuadraticProgram& qp, const ErhModel& model, int horizon,
                        const std::vector<double>& t_out, const std::vector<double>& irr, double t0) {
  if (static_cast<int>(t_out.size()) < horizon || static_cast<int>(irr.size()) < horizon)
    throw std::runtime_error("erh: forecasts shorter than horizon");
  ErhVars v;
  v.duty = qp.add_vars(horizon, 0.0, 1.0);
  v.t_in = qp.add_vars(horizon, -kInf, kInf);
  for (int t = 0; t < horizon; ++t) {
    // t_in[t] = (1-g1) t_in[t-1] + g2*P*duty[t] + g1*t_out + g3*irr
    const double a = 1.0 - model.gamma1;
    double rhs = model.gamma1 * t_out[static_cast<std::size_t>(t)] +
                 model.gamma3 * irr[static_cast<std::size_t>(t)];
    if (t == 0) rhs += a * t0;
    const int row = qp.add_row(rhs, rhs);
    qp.row_term(row, v.t_in[t], 1.0);
    if (t > 0) qp.row_term(row, v.t_in[t - 1], -a);
    qp.row_term(row, v.duty[t], -model.gamma2 * model.rated_kw);
  }
  return v;
}

void erh_comfort_rows(QuadraticProgram& qp, const ErhModel& model, const ErhVars& vars, VarSpan slack) {
  for (int t = 0; t < vars.t_in.count; ++t) {
    // 10*((t_set - 1) - t_in) <= slack
    qp.add_row(-kInf, -10.0 * (model.t_set - 1.0), {{vars.t_in[t], -10.0}, {slack[t], -1.0}});
    // 10*(t_in - (t_set + 1)) <= slack
    qp.add_row(-kInf, 10.0 * (model.t_set + 1.0), {{vars.t_in[t], 10.0}, {slack[t], -1.0}});
  }
}

}  // namespace privshape
