// Core value types: timestamps, grids, profiles, tariff arithmetic, binning,
// CSV round-trips and the scenario-config round-trip guarantee.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "privshape/config.hpp"
#include "privshape/core.hpp"
#include "privshape/csvio.hpp"

using namespace privshape;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("iso8601 formatting and parsing round-trip") {
  CHECK(parse_iso8601("1970-01-01T00:00:00") == 0);
  CHECK(parse_iso8601("2026-01-05T00:00:00") == 1767571200);
  CHECK(format_iso8601(1767571200) == "2026-01-05T00:00:00");
  const std::vector<std::string> stamps{
      "1999-12-31T23:59:59", "2000-02-29T12:00:00", "2026-08-21T07:30:05", "1970-01-01T00:00:01"};
  for (const auto& s : stamps) CHECK(format_iso8601(parse_iso8601(s)) == s);
  for (EpochSeconds t : {EpochSeconds{0}, EpochSeconds{1767571200}, EpochSeconds{951827405}})
    CHECK(parse_iso8601(format_iso8601(t)) == t);
  CHECK_THROWS(parse_iso8601("not a time"));
  CHECK_THROWS(parse_iso8601("2026-13-01T00:00:00"));
  CHECK_THROWS(parse_iso8601("2026-01-01T25:00:00"));
  CHECK(hour_of_day(1767571200) == 0);
  CHECK(hour_of_day(1767571200 + 13 * 3600 + 59) == 13);
}

TEST_CASE("time grids accept only the two supported cadences") {
  TimeGrid hourly(1767571200, 3600, 24);
  CHECK(hourly.at(0) == 1767571200);
  CHECK(hourly.at(23) == 1767571200 + 23 * 3600);
  CHECK(hourly.step_hours() == 1.0);
  TimeGrid fine(1767571200, 300, 12);
  CHECK(fine.step_hours() == doctest::Approx(1.0 / 12.0));
  CHECK_THROWS(TimeGrid(0, 600, 10));
  CHECK_THROWS(TimeGrid(0, 3600, 0));
}

TEST_CASE("load profiles validate values by role") {
  TimeGrid grid(0, 3600, 3);
  CHECK_THROWS(LoadProfile(grid, ProfileRole::sensitive_load, {1.0, 2.0}));  // size mismatch
  CHECK_THROWS(LoadProfile(grid, ProfileRole::sensitive_load, {1.0, -0.5, 2.0}));
  CHECK_THROWS(LoadProfile(grid, ProfileRole::grid_load,
                           {1.0, std::numeric_limits<double>::infinity(), 2.0}));
  // Temperatures may be negative.
  LoadProfile temp(grid, ProfileRole::outdoor_temperature, {-12.5, 0.0, 3.0});
  CHECK(temp.max_value() == 3.0);
  LoadProfile load(grid, ProfileRole::sensitive_load, {1.0, 4.0, 1.0});
  CHECK(load.max_value() == 4.0);
  CHECK(load.mean_value() == doctest::Approx(2.0));
}

TEST_CASE("profile role names round-trip") {
  for (ProfileRole r : {ProfileRole::sensitive_load, ProfileRole::grid_load,
                        ProfileRole::hot_water_draw, ProfileRole::outdoor_temperature,
                        ProfileRole::irradiance})
    CHECK(profile_role_from_string(to_string(r)) == r);
  CHECK_THROWS(profile_role_from_string("voltage"));
}

TEST_CASE("hour-set parsing and formatting") {
  CHECK(parse_hour_set("") == 0u);
  CHECK(parse_hour_set("6-21") == 0x003FFFC0u);
  CHECK(parse_hour_set("0") == 1u);
  CHECK(parse_hour_set("6-21,23") == (0x003FFFC0u | (1u << 23)));
  CHECK(format_hour_set(0x003FFFC0u) == "6-21");
  CHECK(format_hour_set(parse_hour_set("0,5,7-9")) == "0,5,7-9");
  CHECK(parse_hour_set(format_hour_set(0x00FF00FFu)) == 0x00FF00FFu);
  CHECK_THROWS(parse_hour_set("24"));
  CHECK_THROWS(parse_hour_set("9-5"));
  CHECK_THROWS(parse_hour_set("abc"));
}

TEST_CASE("tariff prices follow the peak-hour mask") {
  Tariff t;
  CHECK(t.is_peak_hour(6));
  CHECK(t.is_peak_hour(21));
  CHECK(!t.is_peak_hour(5));
  CHECK(!t.is_peak_hour(22));
  CHECK(t.price_at_hour(12) == 24.6);
  CHECK(t.price_at_hour(2) == 13.15);
  int peak_count = 0;
  for (int h = 0; h < 24; ++h) peak_count += t.is_peak_hour(h) ? 1 : 0;
  CHECK(peak_count == 16);
}

TEST_CASE("energy cost sums per-step price times energy") {
  Tariff t;
  TimeGrid day(1767571200, 3600, 24);  // midnight-aligned day
  LoadProfile zero(day, ProfileRole::grid_load, std::vector<double>(24, 0.0));
  CHECK(energy_cost(zero, t) == 0.0);
  LoadProfile flat(day, ProfileRole::grid_load, std::vector<double>(24, 1.0));
  // 16 peak hours at 24.6 plus 8 off-peak hours at 13.15.
  CHECK(energy_cost(flat, t) == doctest::Approx(498.8).epsilon(1e-12));
  TimeGrid one(1767571200 + 3 * 3600, 3600, 1);  // 03:00, off-peak
  LoadProfile spike(one, ProfileRole::grid_load, {2.0});
  CHECK(energy_cost(spike, t) == doctest::Approx(26.3).epsilon(1e-12));
}

TEST_CASE("bin index covers the range with half-open intervals") {
  Bins b(0.0, 12.0, 24);
  CHECK(b.width() == doctest::Approx(0.5));
  CHECK(b.index(0.0) == 1);    // lower boundary
  CHECK(b.index(12.0) == 24);  // closed top edge
  CHECK(b.index(3.2) == 7);    // interior half-open interval
  CHECK(b.index(0.5) == 2);    // interior edges belong to the upper bin
  CHECK(b.index(11.5) == 24);
  CHECK(b.edge(0) == 0.0);
  CHECK(b.edge(24) == 12.0);
  CHECK(b.edge(12) == doctest::Approx(6.0));
  CHECK_THROWS(b.index(-0.001));
  CHECK_THROWS(b.index(12.001));
  CHECK_THROWS(Bins(1.0, 1.0, 4));
  CHECK_THROWS(Bins(0.0, 1.0, 0));
}

TEST_CASE("bin index is monotone and surjective over midpoints") {
  Bins b(0.0, 12.0, 24);
  int prev = 1;
  for (int i = 0; i <= 4800; ++i) {
    const double v = 12.0 * i / 4800.0;
    const int j = b.index(v);
    CHECK(j >= prev);
    CHECK(j >= 1);
    CHECK(j <= 24);
    prev = j;
  }
  for (int j = 1; j <= 24; ++j) {
    const double mid = b.edge(j - 1) + 0.5 * b.width();
    CHECK(b.index(mid) == j);
  }
  // Every interior edge value lands in the bin it opens.
  for (int j = 1; j < 24; ++j) CHECK(b.index(b.edge(j)) == j + 1);
}

TEST_CASE("double formatting round-trips exactly") {
  const std::vector<double> values{0.0,     1.0,       0.1,     1.0 / 3.0, 5.22,
                                   -2.5e-7, 1.2345678901234567e8, 6.29,    0.0583,
                                   1e300,   -0.0,      74.676,  498.8};
  for (double v : values) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("profile CSV writes and reads back identically") {
  const std::string path = temp_path("privshape_core_roundtrip.csv");
  TimeGrid grid(1767571200, 3600, 5);
  LoadProfile p(grid, ProfileRole::sensitive_load, {0.42, 1.0 / 3.0, 5.22, 0.0, 2.5});
  write_profile_csv(path, p);
  LoadProfile q = read_profile_csv(path, ProfileRole::sensitive_load);
  CHECK(q.grid == grid);
  REQUIRE(q.values.size() == p.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i) CHECK(q.values[i] == p.values[i]);
  std::filesystem::remove(path);
}

TEST_CASE("profile CSV errors cite the offending line") {
  const std::string path = temp_path("privshape_core_bad.csv");

  write_text(path, "wrong,header\n");
  CHECK(error_of([&] { read_profile_csv(path, ProfileRole::grid_load); }).find(":1:") !=
        std::string::npos);

  write_text(path, "timestamp_iso8601,value\n2026-01-05T00:00:00,1.0\n2026-01-05T01:00:00,oops\n");
  CHECK(error_of([&] { read_profile_csv(path, ProfileRole::grid_load); }).find(":3:") !=
        std::string::npos);

  // Duplicate timestamp reported as non-increasing at its line.
  write_text(path,
             "timestamp_iso8601,value\n2026-01-05T00:00:00,1.0\n2026-01-05T00:00:00,2.0\n");
  {
    const std::string msg = error_of([&] { read_profile_csv(path, ProfileRole::grid_load); });
    CHECK(msg.find(":3:") != std::string::npos);
    CHECK(msg.find("non-increasing") != std::string::npos);
  }

  // Gap in an otherwise hourly grid.
  write_text(path,
             "timestamp_iso8601,value\n"
             "2026-01-05T00:00:00,1.0\n"
             "2026-01-05T01:00:00,1.0\n"
             "2026-01-05T03:00:00,1.0\n");
  {
    const std::string msg = error_of([&] { read_profile_csv(path, ProfileRole::grid_load); });
    CHECK(msg.find(":4:") != std::string::npos);
    CHECK(msg.find("gap") != std::string::npos);
  }

  // Unsupported cadence.
  write_text(path,
             "timestamp_iso8601,value\n2026-01-05T00:00:00,1.0\n2026-01-05T00:10:00,1.0\n");
  CHECK(error_of([&] { read_profile_csv(path, ProfileRole::grid_load); }).find("unsupported") !=
        std::string::npos);

  // Negative sensitive load rejected with the file named.
  write_text(path, "timestamp_iso8601,value\n2026-01-05T00:00:00,-1.0\n");
  CHECK(error_of([&] { read_profile_csv(path, ProfileRole::sensitive_load); }).find("negative") !=
        std::string::npos);

  write_text(path, "timestamp_iso8601,value\n");
  CHECK_THROWS(read_profile_csv(path, ProfileRole::grid_load));

  CHECK_THROWS(read_profile_csv(temp_path("privshape_does_not_exist.csv"),
                                ProfileRole::grid_load));
  std::filesystem::remove(path);
}

TEST_CASE("table CSV writes header and rows verbatim") {
  const std::string path = temp_path("privshape_core_table.csv");
  write_table_csv(path, {"a", "b"}, {{"1", "2"}, {"3", "4.5"}});
  std::ifstream in(path);
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1 == "a,b");
  CHECK(l2 == "1,2");
  CHECK(l3 == "3,4.5");
  std::filesystem::remove(path);
}

TEST_CASE("scenario config serialization round-trips field for field") {
  ScenarioConfig def;
  CHECK(parse_config(serialize_config(def)) == def);

  ScenarioConfig full;
  full.name = "roundtrip-test";
  full.horizon = 12;
  full.mu = 7.5;
  full.rho = 3.25;
  full.include_energy_cost = false;
  full.history_window = 96;
  full.control_eps = 0.125;
  full.score_eps = 0.5;
  full.days = 9;
  full.seed = 424242;
  full.step_load = true;
  full.link_margin = 2e-6;
  full.start = "2026-02-02T00:00:00";
  full.tariff.peak_cents_per_kwh = 30.0;
  full.tariff.offpeak_cents_per_kwh = 10.0;
  full.tariff.peak_hours_mask = parse_hour_set("7-20,22");
  full.x_bins = 16;
  full.y_bins = 20;
  full.y_min = 0.5;
  full.y_max = 11.0;
  full.ess = EssModel{};
  full.ess->capacity_kwh = 13.5;
  full.ess->initial_soc = 0.25;
  full.ewh = EwhModel{};
  full.ewh->t_set = 70.0;
  full.ewh->upper_node_base_low = false;
  full.erh = ErhModel{};
  full.erh->gamma2 = 0.2;
  full.solver_max_iter = 5000;
  full.solver_eps = 1e-7;
  full.kkt_tol = 1e-5;
  full.node_limit = 33;
  full.sensitive_csv = "x.csv";
  full.draws_csv = "draws.csv";
  full.outdoor_csv = "outdoor.csv";
  full.irradiance_csv = "irr.csv";
  full.archetype = "house-21355-like";
  const std::string text = serialize_config(full);
  CHECK(parse_config(text) == full);
  CHECK(serialize_config(parse_config(text)) == text);  // serialization is a fixed point

  // Device blocks appear only when the device is configured.
  ScenarioConfig bare;
  bare.ess.reset();
  bare.ewh.reset();
  bare.erh.reset();
  const std::string bare_text = serialize_config(bare);
  CHECK(bare_text.find("[ess]") == std::string::npos);
  ScenarioConfig reparsed = parse_config(bare_text);
  CHECK(!reparsed.ess.has_value());
  CHECK(!reparsed.ewh.has_value());
  CHECK(!reparsed.erh.has_value());
}

TEST_CASE("scenario config parsing rejects unknown keys and sections") {
  CHECK_THROWS(parse_config("[scenario]\nbogus_key = 3\n"));
  CHECK_THROWS(parse_config("[made_up_section]\nx = 1\n"));
  CHECK_THROWS(parse_config("[scenario]\nhorizon = not_a_number\n"));
}

TEST_CASE("scenario config file save and load") {
  const std::string path = temp_path("privshape_core_config.cfg");
  ScenarioConfig cfg;
  cfg.name = "disk-roundtrip";
  cfg.mu = 5.0;
  save_config(cfg, path);
  CHECK(load_config(path) == cfg);
  std::filesystem::remove(path);
  CHECK_THROWS(load_config(temp_path("privshape_missing_config.cfg")));
}
