#pragma once
// Core value types shared by every other module: uniform time grids, load
// profiles with role-dependent validation, the two-tier tariff, and the
// uniform binning used to discretize load values.

#include <cstdint>
#include <string>
#include <vector>

namespace privshape {

// Seconds since the Unix epoch, UTC. No time zones anywhere in the library.
using EpochSeconds = std::int64_t;

// "YYYY-MM-DDTHH:MM:SS" <-> epoch seconds. Throws std::runtime_error on
// malformed input.
std::string format_iso8601(EpochSeconds t);
EpochSeconds parse_iso8601(const std::string& s);

// Hour-of-day (0..23) of a UTC timestamp.
int hour_of_day(EpochSeconds t);

// A uniformly spaced time axis. Only the two supported cadences are allowed:
// 300 s (dispatch/simulation) and 3600 s (optimization/scoring).
struct TimeGrid {
  EpochSeconds start = 0;
  std::int64_t step_seconds = 3600;
  std::size_t size = 0;

  TimeGrid() = default;
  TimeGrid(EpochSeconds start_, std::int64_t step_seconds_, std::size_t size_);

  EpochSeconds at(std::size_t idx) const { return start + step_seconds * static_cast<std::int64_t>(idx); }
  double step_hours() const { return static_cast<double>(step_seconds) / 3600.0; }
  bool operator==(const TimeGrid&) const = default;
};

enum class ProfileRole {
  sensitive_load,    // household consumption x, kW
  grid_load,         // grid-visible load y, kW
  hot_water_draw,    // draw rate, litres per hour
  outdoor_temperature,  // deg C
  irradiance,        // solar forcing, kW-equivalent
};

std::string to_string(ProfileRole role);
ProfileRole profile_role_from_string(const std::string& name);

// A time series bound to a grid. Values must be finite; loads, draws and
// irradiance must be nonnegative (temperatures may not be).
struct LoadProfile {
  TimeGrid grid;
  ProfileRole role = ProfileRole::sensitive_load;
  std::vector<double> values;

  LoadProfile() = default;
  LoadProfile(TimeGrid grid_, ProfileRole role_, std::vector<double> values_);

  std::size_t size() const { return values.size(); }
  double max_value() const;
  double mean_value() const;
};

// Two-tier time-of-use tariff in cents/kWh. `peak_hours` is a bitmask over
// hour-of-day (bit h set => hour h billed at the peak price).
struct Tariff {
  double peak_cents_per_kwh = 24.6;
  double offpeak_cents_per_kwh = 13.15;
  std::uint32_t peak_hours_mask = 0x003FFFC0;  // hours 06..21

  bool is_peak_hour(int hour) const { return (peak_hours_mask >> hour) & 1u; }
  double price_at_hour(int hour) const {
    return is_peak_hour(hour) ? peak_cents_per_kwh : offpeak_cents_per_kwh;
  }
  double price_at(EpochSeconds t) const { return price_at_hour(hour_of_day(t)); }
  bool operator==(const Tariff&) const = default;
};

// "6-21" / "6-21,23" / "" style hour-range list <-> bitmask.
std::uint32_t parse_hour_set(const std::string& spec);
std::string format_hour_set(std::uint32_t mask);

// Total energy cost in cents of a power profile billed per step at the
// tariff price of the step's hour: sum_t y_t * step_hours * price(hour_t).
double energy_cost(const LoadProfile& y, const Tariff& tariff);

// One uniform binning axis: `count` bins over [lo, hi].
// Bins are 1-based and half-open [edge(j-1), edge(j)), except the last bin
// which also contains `hi` (so interior edge values land in the upper bin
// and the axis maximum stays in-range).
struct Bins {
  double lo = 0.0;
  double hi = 1.0;
  int count = 1;

  Bins() = default;
  Bins(double lo_, double hi_, int count_);

  double width() const { return (hi - lo) / count; }
  double edge(int j) const;  // j in 0..count
  // 1-based bin index; throws with the offending value if outside [lo, hi].
  int index(double value) const;
  bool operator==(const Bins&) const = default;
};

// Joint discretization for (x, y) pairs.
struct BinningScheme {
  Bins x;
  Bins y;
  bool operator==(const BinningScheme&) const = default;
};

}  // namespace privshape
