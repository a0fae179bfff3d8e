#include "privshape/csvio.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace privshape {

namespace {

[[noreturn]] void fail_at(const std::string& path, std::size_t line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  // Shortest representation that parses back to the identical double.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

LoadProfile read_profile_csv(const std::string& path, ProfileRole role) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file: " + path);

  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) fail_at(path, 1, "empty file, expected header 'timestamp_iso8601,value'");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp_iso8601,value")
    fail_at(path, lineno, "bad header '" + line + "', expected 'timestamp_iso8601,value'");

  std::vector<EpochSeconds> stamps;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) fail_at(path, lineno, "blank line in profile body");
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) fail_at(path, lineno, "missing value column");
    const std::string ts = line.substr(0, comma);
    const std::string val = line.substr(comma + 1);
    EpochSeconds t;
    try {
      t = parse_iso8601(ts);
    } catch (const std::exception& e) {
      fail_at(path, lineno, e.what());
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(val.c_str(), &end);
    if (end == val.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
      fail_at(path, lineno, "bad numeric value '" + val + "'");
    if (!stamps.empty() && t <= stamps.back())
      fail_at(path, lineno, "non-increasing timestamp '" + ts + "'");
    stamps.push_back(t);
    values.push_back(v);
  }
  if (stamps.empty()) fail_at(path, lineno + 1, "profile has no data rows");

  std::int64_t step = stamps.size() > 1 ? stamps[1] - stamps[0] : 3600;
  if (step != 300 && step != 3600)
    fail_at(path, 3, "unsupported grid spacing " + std::to_string(step) + " s (expected 300 or 3600)");
  for (std::size_t i = 1; i < stamps.size(); ++i) {
    if (stamps[i] - stamps[i - 1] != step)
      fail_at(path, i + 2, "grid gap: spacing " + std::to_string(stamps[i] - stamps[i - 1]) +
                               " s differs from profile spacing " + std::to_string(step) + " s");
  }

  try {
    return LoadProfile(TimeGrid(stamps.front(), step, stamps.size()), role, std::move(values));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_profile_csv(const std::string& path, const LoadProfile& profile) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write profile file: " + path);
  out << "timestamp_iso8601,value\n";
  for (std::size_t i = 0; i < profile.size(); ++i)
    out << format_iso8601(profile.grid.at(i)) << ',' << format_double(profile.values[i]) << '\n';
  if (!out) throw std::runtime_error("I/O error while writing: " + path);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write table file: " + path);
  auto emit_row = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  emit_row(header);
  for (const auto& row : rows) emit_row(row);
  if (!out) throw std::runtime_error("I/O error while writing: " + path);
}

}  // namespace privshape
