// Python module: scoring, closed-form reference checks, synthetic
// households, configs, and full scenario runs, with plain dict/list
// results so the module needs no numpy.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "privshape/config.hpp"
#include "privshape/controller.hpp"
#include "privshape/harness.hpp"
#include "privshape/mi_metrics.hpp"
#include "privshape/synth.hpp"
#include "privshape/theory.hpp"

namespace py = pybind11;
using namespace privshape;

namespace {

BinningScheme make_binning(double x_lo, double x_hi, int x_bins, double y_lo, double y_hi,
                           int y_bins) {
  return BinningScheme{Bins{x_lo, x_hi, x_bins}, Bins{y_lo, y_hi, y_bins}};
}

py::dict report_dict(const RunReport& rep) {
  py::dict d;
  d["name"] = rep.name;
  d["steps"] = rep.steps;
  d["days"] = rep.days;
  d["iid_mi_bits"] = rep.iid_mi_bits;
  d["markov_mi_bits"] = rep.markov_mi_bits;
  d["entropy_x_bits"] = rep.entropy_x_bits;
  d["total_cost_cents"] = rep.total_cost_cents;
  d["avg_daily_cost_cents"] = rep.avg_daily_cost_cents;
  d["comfort_violation_count"] = rep.comfort_violation_count;
  d["comfort_violation_max"] = rep.comfort_violation_max;
  d["solver_failures"] = rep.solver_failures;
  d["fallback_steps"] = rep.fallback_steps;
  d["total_nodes"] = rep.total_nodes;
  d["dispatch_flagged_hours"] = rep.dispatch_flagged_hours;
  d["x"] = rep.x;
  d["y"] = rep.y;
  d["s_ess"] = rep.s_ess;
  d["s_ewh"] = rep.s_ewh;
  d["s_erh"] = rep.s_erh;
  return d;
}

}  // namespace

PYBIND11_MODULE(_privshape, m) {
  m.doc() = "household load shaping and leakage scoring";

  py::class_<Bins>(m, "Bins")
      .def(py::init<double, double, int>(), py::arg("lo"), py::arg("hi"), py::arg("count"))
      .def_readonly("lo", &Bins::lo)
      .def_readonly("hi", &Bins::hi)
      .def_readonly("count", &Bins::count)
      .def("index", &Bins::index);

  py::class_<BinningScheme>(m, "BinningScheme")
      .def(py::init(&make_binning), py::arg("x_lo"), py::arg("x_hi"), py::arg("x_bins"),
           py::arg("y_lo"), py::arg("y_hi"), py::arg("y_bins"))
      .def_readonly("x", &BinningScheme::x)
      .def_readonly("y", &BinningScheme::y);

  m.def(
      "mi_iid",
      [](const std::vector<double>& xs, const std::vector<double>& ys,
         const BinningScheme& binning, double eps) { return mi_iid(xs, ys, binning, eps); },
      py::arg("xs"), py::arg("ys"), py::arg("binning"), py::arg("eps") = 0.0,
      "Pooled i.i.d. mutual information between two sequences, in bits.");
  m.def(
      "mi_markov",
      [](const std::vector<double>& xs, const std::vector<double>& ys,
         const BinningScheme& binning, double eps) { return mi_markov(xs, ys, binning, eps); },
      py::arg("xs"), py::arg("ys"), py::arg("binning"), py::arg("eps") = 0.0,
      "Stationary first-order Markov mutual-information bound, in bits.");
  m.def(
      "score_pair",
      [](const std::vector<double>& xs, const std::vector<double>& ys,
         const BinningScheme& binning, double eps) {
        const MiReport r = score_pair(xs, ys, binning, eps);
        py::dict d;
        d["iid_mi_bits"] = r.iid_mi_bits;
        d["markov_mi_bits"] = r.markov_mi_bits;
        d["entropy_x_bits"] = r.entropy_x_bits;
        d["k"] = r.k;
        return d;
      },
      py::arg("xs"), py::arg("ys"), py::arg("binning"), py::arg("eps") = 0.0);

  m.def(
      "theory_checks",
      [](std::uint64_t seed) {
        const TheoryReport rep = run_theory_checks(seed);
        py::list out;
        for (const TheoryCheck& c : rep.checks) {
          py::dict d;
          d["name"] = c.name;
          d["value"] = c.value;
          d["reference"] = c.reference;
          d["tolerance"] = c.tolerance;
          d["pass"] = c.pass;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 7, "Closed-form reference checks; every entry should pass.");

  m.def("parse_config", &parse_config, py::arg("text"),
        "Parse a scenario config from its text form.");
  m.def("serialize_config", &serialize_config, py::arg("config"));
  m.def("standard_scenario", &standard_scenario,
        "Scenario with every device configured at its catalog parameters.");

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("horizon", &ScenarioConfig::horizon)
      .def_readwrite("mu", &ScenarioConfig::mu)
      .def_readwrite("rho", &ScenarioConfig::rho)
      .def_readwrite("include_energy_cost", &ScenarioConfig::include_energy_cost)
      .def_readwrite("history_window", &ScenarioConfig::history_window)
      .def_readwrite("days", &ScenarioConfig::days)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("step_load", &ScenarioConfig::step_load)
      .def_readwrite("archetype", &ScenarioConfig::archetype)
      .def_readwrite("x_bins", &ScenarioConfig::x_bins)
      .def_readwrite("y_bins", &ScenarioConfig::y_bins)
      .def_readwrite("y_min", &ScenarioConfig::y_min)
      .def_readwrite("y_max", &ScenarioConfig::y_max)
      .def_readwrite("solver_eps", &ScenarioConfig::solver_eps)
      .def_readwrite("node_limit", &ScenarioConfig::node_limit)
      .def("drop_ess", [](ScenarioConfig& c) { c.ess.reset(); })
      .def("drop_ewh", [](ScenarioConfig& c) { c.ewh.reset(); })
      .def("drop_erh", [](ScenarioConfig& c) { c.erh.reset(); })
      .def("has_ess", [](const ScenarioConfig& c) { return c.ess.has_value(); })
      .def("has_ewh", [](const ScenarioConfig& c) { return c.ewh.has_value(); })
      .def("has_erh", [](const ScenarioConfig& c) { return c.erh.has_value(); });

  m.def(
      "generate_profile",
      [](std::uint64_t seed, int days, const std::string& archetype) {
        const ProfileBundle b = generate_synthetic_profile(seed, days, archetype);
        py::dict d;
        d["x"] = b.x;
        d["draws"] = b.draws;
        d["t_out"] = b.t_out;
        d["irradiance"] = b.irradiance;
        d["draws_5min"] = b.draws_5min;
        return d;
      },
      py::arg("seed"), py::arg("days"), py::arg("archetype") = "house-23618-like",
      "Deterministic synthetic household (hourly series plus 5-minute draws).");

  m.def(
      "run_scenario",
      [](const ScenarioConfig& cfg) {
        const ProfileBundle bundle = prepare_bundle(cfg);
        const RunReport rep = run_receding_horizon(cfg, bundle);
        const AuditResult audit = audit_run(cfg, bundle, rep);
        py::dict d = report_dict(rep);
        d["audit_max_violation"] = audit.max_violation;
        d["audit_balance_error"] = audit.max_balance_error;
        return d;
      },
      py::arg("config"),
      "Run one scenario end to end (profiles per the config) and audit it.");
}
