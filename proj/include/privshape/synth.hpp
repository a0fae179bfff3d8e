#pragma once
// Deterministic synthetic household profiles: hourly sensitive load with
// an overnight base, morning/evening peaks and appliance spikes; 5-minute
// hot-water draw events expressed as litres-per-hour rates; and a cold
// winter weather pair (outdoor temperature, solar irradiance).  Fully
// determined by (seed, days, archetype).

#include <cstdint>
#include <string>

#include "privshape/controller.hpp"

namespace privshape {

struct Archetype {
  std::string name;
  double peak_kw = 5.22;        // exact maximum of the generated load
  double base_kw = 0.42;        // overnight floor
  double evening_kw = 3.1;      // mean evening-peak level before scaling
  double morning_kw = 1.9;      // mean morning-peak level before scaling
  double spike_rate = 0.10;     // per-hour probability of an appliance spike
  double noise_sd = 0.13;       // multiplicative log-noise
  double litres_per_day = 75.0;
  double max_draw_rate = 112.0;  // litres/h cap on any 5-minute slot
};

// Known archetypes: "house-23618-like" (peak 5.22 kW, binned entropy near
// 2.710 bits) and "house-21355-like" (peak 4.87 kW, entropy near 2.246
// bits).  Unknown names throw.
Archetype archetype_by_name(const std::string& name);

// Generates `24*(7 + days + 1)` hours starting at `start`: seven history
// days, the controlled days, and one lookahead day.  Requires days >= 7.
ProfileBundle generate_synthetic_profile(std::uint64_t seed, int days,
                                         const std::string& archetype,
                                         EpochSeconds start = 1767571200 /* 2026-01-05 */);

}  // namespace privshape
