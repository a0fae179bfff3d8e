#include "privshape/core.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace privshape {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// days_from_civil), valid far beyond any timestamp this library will see.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);             // [0, 399]
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;  // [0, 365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;            // [0, 146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += m <= 2;
}

}  // namespace

std::string format_iso8601(EpochSeconds t) {
  std::int64_t days = t / 86400;
  std::int64_t sod = t % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, m, d,
                static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                static_cast<int>(sod % 60));
  return buf;
}

EpochSeconds parse_iso8601(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
  char tsep = 0;
  char trail = 0;
  const int got = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d%c", &y, &mo, &d, &tsep, &h, &mi, &se, &trail);
  if (got != 7 || (tsep != 'T' && tsep != ' ')) fail("malformed ISO-8601 timestamp: '" + s + "'");
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || se < 0 || se > 60)
    fail("out-of-range field in timestamp: '" + s + "'");
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

int hour_of_day(EpochSeconds t) {
  std::int64_t sod = t % 86400;
  if (sod < 0) sod += 86400;
  return static_cast<int>(sod / 3600);
}

TimeGrid::TimeGrid(EpochSeconds start_, std::int64_t step_seconds_, std::size_t size_)
    : start(start_), step_seconds(step_seconds_), size(size_) {
  if (step_seconds != 300 && step_seconds != 3600)
    fail("unsupported grid step: " + std::to_string(step_seconds) + " s (expected 300 or 3600)");
  if (size == 0) fail("time grid must have at least one step");
}

std::string to_string(ProfileRole role) {
  switch (role) {
    case ProfileRole::sensitive_load: return "sensitive_load";
    case ProfileRole::grid_load: return "grid_load";
    case ProfileRole::hot_water_draw: return "hot_water_draw";
    case ProfileRole::outdoor_temperature: return "outdoor_temperature";
    case ProfileRole::irradiance: return "irradiance";
  }
  fail("unknown profile role");
}

ProfileRole profile_role_from_string(const std::string& name) {
  if (name == "sensitive_load") return ProfileRole::sensitive_load;
  if (name == "grid_load") return ProfileRole::grid_load;
  if (name == "hot_water_draw") return ProfileRole::hot_water_draw;
  if (name == "outdoor_temperature") return ProfileRole::outdoor_temperature;
  if (name == "irradiance") return ProfileRole::irradiance;
  fail("unknown profile role: '" + name + "'");
}

LoadProfile::LoadProfile(TimeGrid grid_, ProfileRole role_, std::vector<double> values_)
    : grid(grid_), role(role_), values(std::move(values_)) {
  if (values.size() != grid.size)
    fail("profile has " + std::to_string(values.size()) + " values but its grid has " +
         std::to_string(grid.size) + " steps");
  const bool nonneg = role != ProfileRole::outdoor_temperature;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      fail("non-finite value at step " + std::to_string(i) + " in " + to_string(role) + " profile");
    if (nonneg && values[i] < 0.0)
      fail("negative value " + std::to_string(values[i]) + " at step " + std::to_string(i) + " in " +
           to_string(role) + " profile");
  }
}

double LoadProfile::max_value() const {
  double m = values.empty() ? 0.0 : values.front();
  for (double v : values) m = std::max(m, v);
  return m;
}

double LoadProfile::mean_value() const {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

std::uint32_t parse_hour_set(const std::string& spec) {
  std::uint32_t mask = 0;
  std::size_t pos = 0;
  if (spec.empty()) return 0;
  while (pos < spec.size()) {
    std::size_t comma = spec.find(',', pos);
    const std::string part = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    int lo = 0, hi = 0;
    if (std::sscanf(part.c_str(), "%d-%d", &lo, &hi) == 2) {
      // range
    } else if (std::sscanf(part.c_str(), "%d", &lo) == 1) {
      hi = lo;
    } else {
      fail("malformed hour set element: '" + part + "'");
    }
    if (lo < 0 || hi > 23 || lo > hi) fail("hour set element out of range: '" + part + "'");
    for (int h = lo; h <= hi; ++h) mask |= (1u << h);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return mask;
}

std::string format_hour_set(std::uint32_t mask) {
  std::string out;
  int h = 0;
  while (h < 24) {
    if ((mask >> h) & 1u) {
      int start = h;
      while (h + 1 < 24 && ((mask >> (h + 1)) & 1u)) ++h;
      if (!out.empty()) out += ',';
      if (start == h)
        out += std::to_string(start);
      else
        out += std::to_string(start) + "-" + std::to_string(h);
    }
    ++h;
  }
  return out;
}

double energy_cost(const LoadProfile& y, const Tariff& tariff) {
  const double dt_hours = y.grid.step_hours();
  double cents = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    cents += y.values[i] * dt_hours * tariff.price_at(y.grid.at(i));
  return cents;
}

Bins::Bins(double lo_, double hi_, int count_) : lo(lo_), hi(hi_), count(count_) {
  if (!(hi > lo)) fail("binning axis needs hi > lo");
  if (count < 1) fail("binning axis needs at least one bin");
}

double Bins::edge(int j) const {
  if (j < 0 || j > count) fail("bin edge index out of range");
  if (j == 0) return lo;
  if (j == count) return hi;
  return lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count);
}

int Bins::index(double value) const {
  if (!(value >= lo && value <= hi))
    fail("value " + std::to_string(value) + " outside binning range [" + std::to_string(lo) + ", " +
         std::to_string(hi) + "]");
  if (value >= hi) return count;
  int j = 1 + static_cast<int>((value - lo) / width());
  // Guard against floating-point edge effects, then settle on the half-open
  // interval containing the value (interior edges belong to the upper bin).
  if (j > count) j = count;
  while (j > 1 && value < edge(j - 1)) --j;
  while (j < count && value >= edge(j)) ++j;
  return j;
}

}  // namespace privshape
