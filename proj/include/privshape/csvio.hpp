#pragma once
// Strict CSV input/output for time-series profiles.
//
// Profile format: a header row "timestamp_iso8601,value" followed by one row
// per step. Timestamps must be strictly increasing and uniformly spaced at a
// supported cadence. All parse errors cite the 1-based line number.

#include <string>
#include <vector>

#include "privshape/core.hpp"

namespace privshape {

LoadProfile read_profile_csv(const std::string& path, ProfileRole role);
void write_profile_csv(const std::string& path, const LoadProfile& profile);

// Numeric formatting used for every CSV the library writes: shortest string
// that round-trips the double exactly ('.' decimal separator).
std::string format_double(double v);

// Generic small-table writer: one header row then data rows.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

}  // namespace privshape
