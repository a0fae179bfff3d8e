#include "privshape/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "privshape/csvio.hpp"

namespace privshape {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("config: " + msg); }

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') fail("bad numeric value for " + key + ": '" + v + "'");
  return d;
}

int parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long l = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') fail("bad integer value for " + key + ": '" + v + "'");
  return static_cast<int>(l);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long l = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') fail("bad integer value for " + key + ": '" + v + "'");
  return l;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail("bad boolean value for " + key + ": '" + v + "' (use true/false)");
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail("line " + std::to_string(lineno) + ": malformed section header '" + s + "'");
      section = s.substr(1, s.size() - 2);
      if (section != "scenario" && section != "tariff" && section != "binning" && section != "solver" &&
          section != "ess" && section != "ewh" && section != "erh" && section != "profiles" &&
          section != "synthetic")
        fail("unknown section [" + section + "]");
      if (section == "ess" && !cfg.ess) cfg.ess = EssModel{};
      if (section == "ewh" && !cfg.ewh) cfg.ewh = EwhModel{};
      if (section == "erh" && !cfg.erh) cfg.erh = ErhModel{};
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail("line " + std::to_string(lineno) + ": expected key = value, got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (section == "scenario") {
      if (key == "name") cfg.name = val;
      else if (key == "horizon") cfg.horizon = parse_int(qual, val);
      else if (key == "mu") cfg.mu = parse_double(qual, val);
      else if (key == "rho") cfg.rho = parse_double(qual, val);
      else if (key == "include_energy_cost") cfg.include_energy_cost = parse_bool(qual, val);
      else if (key == "history_window") cfg.history_window = parse_int(qual, val);
      else if (key == "control_eps") cfg.control_eps = parse_double(qual, val);
      else if (key == "score_eps") cfg.score_eps = parse_double(qual, val);
      else if (key == "days") cfg.days = parse_int(qual, val);
      else if (key == "seed") cfg.seed = parse_u64(qual, val);
      else if (key == "step_load") cfg.step_load = parse_bool(qual, val);
      else if (key == "link_margin") cfg.link_margin = parse_double(qual, val);
      else if (key == "start") cfg.start = val;
      else fail("unknown key " + qual);
    } else if (section == "tariff") {
      if (key == "peak_cents_per_kwh") cfg.tariff.peak_cents_per_kwh = parse_double(qual, val);
      else if (key == "offpeak_cents_per_kwh") cfg.tariff.offpeak_cents_per_kwh = parse_double(qual, val);
      else if (key == "peak_hours") cfg.tariff.peak_hours_mask = parse_hour_set(val);
      else fail("unknown key " + qual);
    } else if (section == "binning") {
      if (key == "x_bins") cfg.x_bins = parse_int(qual, val);
      else if (key == "y_bins") cfg.y_bins = parse_int(qual, val);
      else if (key == "y_min") cfg.y_min = parse_double(qual, val);
      else if (key == "y_max") cfg.y_max = parse_double(qual, val);
      else fail("unknown key " + qual);
    } else if (section == "solver") {
      if (key == "max_iter") cfg.solver_max_iter = parse_int(qual, val);
      else if (key == "eps") cfg.solver_eps = parse_double(qual, val);
      else if (key == "kkt_tol") cfg.kkt_tol = parse_double(qual, val);
      else if (key == "node_limit") cfg.node_limit = parse_int(qual, val);
      else fail("unknown key " + qual);
    } else if (section == "ess") {
      EssModel& m = *cfg.ess;
      if (key == "capacity_kwh") m.capacity_kwh = parse_double(qual, val);
      else if (key == "charge_limit_kw") m.charge_limit_kw = parse_double(qual, val);
      else if (key == "discharge_limit_kw") m.discharge_limit_kw = parse_double(qual, val);
      else if (key == "eta_charge") m.eta_charge = parse_double(qual, val);
      else if (key == "eta_discharge") m.eta_discharge = parse_double(qual, val);
      else if (key == "initial_soc") m.initial_soc = parse_double(qual, val);
      else fail("unknown key " + qual);
    } else if (section == "ewh") {
      EwhModel& m = *cfg.ewh;
      if (key == "rated_kw") m.rated_kw = parse_double(qual, val);
      else if (key == "t_absmin") m.t_absmin = parse_double(qual, val);
      else if (key == "t_absmax") m.t_absmax = parse_double(qual, val);
      else if (key == "t_set") m.t_set = parse_double(qual, val);
      else if (key == "t_mains") m.t_mains = parse_double(qual, val);
      else if (key == "cp_kj_per_litre_k") m.cp_kj_per_litre_k = parse_double(qual, val);
      else if (key == "c_low_kj_per_k") m.c_low_kj_per_k = parse_double(qual, val);
      else if (key == "c_up_kj_per_k") m.c_up_kj_per_k = parse_double(qual, val);
      else if (key == "ua_low_kw_per_k") m.ua_low_kw_per_k = parse_double(qual, val);
      else if (key == "ua_up_kw_per_k") m.ua_up_kw_per_k = parse_double(qual, val);
      else if (key == "tank_litres") m.tank_litres = parse_double(qual, val);
      else if (key == "t_indoor") m.t_indoor = parse_double(qual, val);
      else if (key == "upper_node_base") {
        if (val == "low") m.upper_node_base_low = true;
        else if (val == "up") m.upper_node_base_low = false;
        else fail("bad value for " + qual + ": '" + val + "' (use low/up)");
      } else fail("unknown key " + qual);
    } else if (section == "erh") {
      ErhModel& m = *cfg.erh;
      if (key == "rated_kw") m.rated_kw = parse_double(qual, val);
      else if (key == "t_set") m.t_set = parse_double(qual, val);
      else if (key == "gamma1") m.gamma1 = parse_double(qual, val);
      else if (key == "gamma2") m.gamma2 = parse_double(qual, val);
      else if (key == "gamma3") m.gamma3 = parse_double(qual, val);
      else fail("unknown key " + qual);
    } else if (section == "profiles") {
      if (key == "sensitive") cfg.sensitive_csv = val;
      else if (key == "draws") cfg.draws_csv = val;
      else if (key == "outdoor_temperature") cfg.outdoor_csv = val;
      else if (key == "irradiance") cfg.irradiance_csv = val;
      else fail("unknown key " + qual);
    } else if (section == "synthetic") {
      if (key == "archetype") cfg.archetype = val;
      else fail("unknown key " + qual);
    } else {
      fail("line " + std::to_string(lineno) + ": key '" + key + "' outside any section");
    }
  }
  if (cfg.horizon < 2) fail("scenario.horizon must be at least 2");
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream o;
  const auto d = [](double v) { return format_double(v); };
  o << "[scenario]\n";
  o << "name = " << cfg.name << "\n";
  o << "horizon = " << cfg.horizon << "\n";
  o << "mu = " << d(cfg.mu) << "\n";
  o << "rho = " << d(cfg.rho) << "\n";
  o << "include_energy_cost = " << (cfg.include_energy_cost ? "true" : "false") << "\n";
  o << "history_window = " << cfg.history_window << "\n";
  o << "control_eps = " << d(cfg.control_eps) << "\n";
  o << "score_eps = " << d(cfg.score_eps) << "\n";
  o << "days = " << cfg.days << "\n";
  o << "seed = " << cfg.seed << "\n";
  o << "step_load = " << (cfg.step_load ? "true" : "false") << "\n";
  o << "link_margin = " << d(cfg.link_margin) << "\n";
  o << "start = " << cfg.start << "\n";
  o << "\n[tariff]\n";
  o << "peak_cents_per_kwh = " << d(cfg.tariff.peak_cents_per_kwh) << "\n";
  o << "offpeak_cents_per_kwh = " << d(cfg.tariff.offpeak_cents_per_kwh) << "\n";
  o << "peak_hours = " << format_hour_set(cfg.tariff.peak_hours_mask) << "\n";
  o << "\n[binning]\n";
  o << "x_bins = " << cfg.x_bins << "\n";
  o << "y_bins = " << cfg.y_bins << "\n";
  o << "y_min = " << d(cfg.y_min) << "\n";
  o << "y_max = " << d(cfg.y_max) << "\n";
  o << "\n[solver]\n";
  o << "max_iter = " << cfg.solver_max_iter << "\n";
  o << "eps = " << d(cfg.solver_eps) << "\n";
  o << "kkt_tol = " << d(cfg.kkt_tol) << "\n";
  o << "node_limit = " << cfg.node_limit << "\n";
  if (cfg.ess) {
    const EssModel& m = *cfg.ess;
    o << "\n[ess]\n";
    o << "capacity_kwh = " << d(m.capacity_kwh) << "\n";
    o << "charge_limit_kw = " << d(m.charge_limit_kw) << "\n";
    o << "discharge_limit_kw = " << d(m.discharge_limit_kw) << "\n";
    o << "eta_charge = " << d(m.eta_charge) << "\n";
    o << "eta_discharge = " << d(m.eta_discharge) << "\n";
    o << "initial_soc = " << d(m.initial_soc) << "\n";
  }
  if (cfg.ewh) {
    const EwhModel& m = *cfg.ewh;
    o << "\n[ewh]\n";
    o << "rated_kw = " << d(m.rated_kw) << "\n";
    o << "t_absmin = " << d(m.t_absmin) << "\n";
    o << "t_absmax = " << d(m.t_absmax) << "\n";
    o << "t_set = " << d(m.t_set) << "\n";
    o << "t_mains = " << d(m.t_mains) << "\n";
    o << "cp_kj_per_litre_k = " << d(m.cp_kj_per_litre_k) << "\n";
    o << "c_low_kj_per_k = " << d(m.c_low_kj_per_k) << "\n";
    o << "c_up_kj_per_k = " << d(m.c_up_kj_per_k) << "\n";
    o << "ua_low_kw_per_k = " << d(m.ua_low_kw_per_k) << "\n";
    o << "ua_up_kw_per_k = " << d(m.ua_up_kw_per_k) << "\n";
    o << "tank_litres = " << d(m.tank_litres) << "\n";
    o << "t_indoor = " << d(m.t_indoor) << "\n";
    o << "upper_node_base = " << (m.upper_node_base_low ? "low" : "up") << "\n";
  }
  if (cfg.erh) {
    const ErhModel& m = *cfg.erh;
    o << "\n[erh]\n";
    o << "rated_kw = " << d(m.rated_kw) << "\n";
    o << "t_set = " << d(m.t_set) << "\n";
    o << "gamma1 = " << d(m.gamma1) << "\n";
    o << "gamma2 = " << d(m.gamma2) << "\n";
    o << "gamma3 = " << d(m.gamma3) << "\n";
  }
  o << "\n[profiles]\n";
  o << "sensitive = " << cfg.sensitive_csv << "\n";
  o << "draws = " << cfg.draws_csv << "\n";
  o << "outdoor_temperature = " << cfg.outdoor_csv << "\n";
  o << "irradiance = " << cfg.irradiance_csv << "\n";
  o << "\n[synthetic]\n";
  o << "archetype = " << cfg.archetype << "\n";
  return o.str();
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write file: " + path);
  out << serialize_config(cfg);
  if (!out) fail("I/O error while writing: " + path);
}

}  // namespace privshape
