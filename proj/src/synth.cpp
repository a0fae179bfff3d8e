#include "privshape/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "privshape/rng.hpp"

namespace privshape {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("synth: " + msg);
}

// Hour-of-day template before day factors and noise, in kW.
double shape_at(const Archetype& a, int hour, bool weekend) {
  const double midday = a.base_kw + 0.30;
  switch (hour) {
    case 0: case 1: case 2: case 3: case 4:
      return a.base_kw;
    case 5:
      return a.base_kw + 0.05;
    case 6:
      return weekend ? a.base_kw + 0.15 : a.base_kw + 0.4 * a.morning_kw;
    case 7:
      return weekend ? a.base_kw + 0.5 * a.morning_kw : a.morning_kw;
    case 8:
      return weekend ? a.morning_kw : 0.75 * a.morning_kw;
    case 9:
      return weekend ? 0.9 * a.morning_kw : midday + 0.15;
    case 10: case 11: case 12: case 13: case 14:
      return weekend ? midday + 0.35 : midday;
    case 15:
      return midday + 0.1;
    case 16:
      return 0.55 * a.evening_kw;
    case 17: case 18: case 19:
      return a.evening_kw;
    case 20:
      return 0.9 * a.evening_kw;
    case 21:
      return 0.65 * a.evening_kw;
    case 22:
      return 0.35 * a.evening_kw;
    default:
      return a.base_kw + 0.15;
  }
}

int poisson_count(Rng& rng, double lambda) {
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  while (true) {
    p *= rng.u01();
    if (p <= limit) return k;
    ++k;
    if (k > 1000) return k;  // unreachable for sane lambda
  }
}

}  // namespace

Archetype archetype_by_name(const std::string& name) {
  if (name == "house-23618-like") {
    Archetype a;
    a.name = name;
    a.peak_kw = 5.22;
    a.base_kw = 0.42;
    a.evening_kw = 3.10;
    a.morning_kw = 1.90;
    a.spike_rate = 0.10;
    a.noise_sd = 0.13;
    return a;
  }
  if (name == "house-21355-like") {
    Archetype a;
    a.name = name;
    a.peak_kw = 4.87;
    a.base_kw = 0.55;
    a.evening_kw = 1.55;
    a.morning_kw = 1.05;
    a.spike_rate = 0.035;
    a.noise_sd = 0.09;
    return a;
  }
  fail("unknown archetype \"" + name + "\"");
}

ProfileBundle generate_synthetic_profile(std::uint64_t seed, int days,
                                         const std::string& archetype, EpochSeconds start) {
  if (days < 7) fail("need at least 7 controlled days, got " + std::to_string(days));
  const Archetype a = archetype_by_name(archetype);
  const int total_days = 7 + days + 1;  // history + controlled + lookahead
  const int total_h = 24 * total_days;

  ProfileBundle b;
  b.hourly = TimeGrid{start, 3600, static_cast<std::size_t>(total_h)};
  b.x.resize(total_h);
  b.draws.assign(total_h, 0.0);
  b.t_out.resize(total_h);
  b.irradiance.resize(total_h);
  b.draws_5min.assign(static_cast<std::size_t>(total_h) * 12, 0.0);
  b.t_out_5min.resize(static_cast<std::size_t>(total_h) * 12);
  b.irradiance_5min.resize(static_cast<std::size_t>(total_h) * 12);
  b.has_5min = true;

  // Day-of-week with Monday = 0 (the epoch began on a Thursday).
  const int start_dow = static_cast<int>(((start / 86400) + 3) % 7);

  // --- Sensitive load ------------------------------------------------------
  {
    Rng rng(derive_seed(seed, 1));
    for (int d = 0; d < total_days; ++d) {
      const bool weekend = ((start_dow + d) % 7) >= 5;
      const double day_factor = std::exp(0.10 * rng.normal());
      for (int h = 0; h < 24; ++h) {
        double v = shape_at(a, h, weekend) * day_factor * std::exp(a.noise_sd * rng.normal());
        double p_spike = a.spike_rate;
        if (h >= 17 && h <= 21) p_spike *= 2.0;
        if (h <= 5) p_spike *= 0.4;
        if (rng.u01() < p_spike) v += rng.uniform(0.8, 2.2);
        b.x[d * 24 + h] = v;
      }
    }
    // Normalize to the archetype's exact peak.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < b.x.size(); ++i)
      if (b.x[i] > b.x[arg]) arg = i;
    const double scale = a.peak_kw / b.x[arg];
    for (double& v : b.x) v = std::max(0.05, v * scale);
    b.x[arg] = a.peak_kw;
  }

  // --- Hot-water draws (5-minute rates, litres/h) --------------------------
  {
    Rng rng(derive_seed(seed, 2));
    auto add_event = [&](int day, int hour, int slot_jitter, double litres, double rate) {
      rate = std::min(rate, a.max_draw_rate);
      int s = (day * 24 + hour) * 12 + slot_jitter;
      double left = litres;
      while (left > 1e-12 && s < total_h * 12) {
        const double slot_litres = std::min(left, rate / 12.0);
        b.draws_5min[s] += slot_litres * 12.0;  // rate for this slot
        left -= slot_litres;
        ++s;
      }
    };
    for (int d = 0; d < total_days; ++d) {
      const bool weekend = ((start_dow + d) % 7) >= 5;
      // Morning shower(s).
      add_event(d, 6 + rng.uniform_int(0, 2), rng.uniform_int(0, 11), rng.uniform(30.0, 44.0),
                rng.uniform(90.0, a.max_draw_rate));
      if (weekend && rng.u01() < 0.5)
        add_event(d, 8 + rng.uniform_int(0, 2), rng.uniform_int(0, 11), rng.uniform(24.0, 36.0),
                  rng.uniform(80.0, a.max_draw_rate));
      // Evening use.
      if (rng.u01() < 0.85)
        add_event(d, 19 + rng.uniform_int(0, 2), rng.uniform_int(0, 11), rng.uniform(16.0, 30.0),
                  rng.uniform(60.0, 100.0));
      // Scattered small draws.
      const int n_small = poisson_count(rng, 8.0);
      for (int k = 0; k < n_small; ++k) {
        const int hour = rng.uniform_int(7, 22);
        const double litres = rng.uniform(0.8, 3.2);
        add_event(d, hour, rng.uniform_int(0, 11), litres, litres * 12.0);
      }
    }
    for (double& r : b.draws_5min) r = std::min(r, a.max_draw_rate);
    for (int hidx = 0; hidx < total_h; ++hidx) {
      double sum = 0;
      for (int s = 0; s < 12; ++s) sum += b.draws_5min[static_cast<std::size_t>(hidx) * 12 + s];
      b.draws[hidx] = sum / 12.0;  // mean rate over the hour
    }
  }

  // --- Weather -------------------------------------------------------------
  {
    Rng rng(derive_seed(seed, 3));
    double walk = 0.0;
    for (int d = 0; d < total_days; ++d) {
      walk = 0.85 * walk + 2.2 * rng.normal();
      const double day_mean = -1.0 + walk;
      const double clear = rng.uniform(0.15, 1.0);
      const double clear2 = clear * clear;
      for (int h = 0; h < 24; ++h) {
        const double t = day_mean + 4.0 * std::sin(2.0 * kPi * (h - 9.0) / 24.0) +
                         0.6 * rng.normal();
        b.t_out[d * 24 + h] = t;
        const double daylight = (h >= 8 && h <= 16)
                                    ? std::sin(kPi * (h - 8.0) / 8.5)
                                    : 0.0;
        b.irradiance[d * 24 + h] =
            std::max(0.0, 0.55 * clear2 * daylight * rng.uniform(0.75, 1.0));
      }
    }
    for (int hidx = 0; hidx < total_h; ++hidx)
      for (int s = 0; s < 12; ++s) {
        b.t_out_5min[static_cast<std::size_t>(hidx) * 12 + s] = b.t_out[hidx];
        b.irradiance_5min[static_cast<std::size_t>(hidx) * 12 + s] = b.irradiance[hidx];
      }
  }

  return b;
}

}  // namespace privshape
