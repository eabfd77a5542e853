#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rtmpc/closed_loop.hpp"

namespace rtmpc {

inline constexpr const char* kVersion = "0.1.0";

/// Full-precision decimal rendering (round-trips a double exactly).
std::string format_full(double value);

/// Parsed numeric CSV table.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  Index column(const std::string& name) const;  // -1 when absent
};

/// Write the trace as plot-ready data: <prefix>_signals.csv (one row per
/// basic period), <prefix>_intervals.csv (one row per completed updating
/// interval) and <prefix>_meta.txt (the resolved configuration echo).
void write_trace(const Trace<double>& trace, const std::filesystem::path& directory,
                 const std::string& prefix);

Table read_table(const std::filesystem::path& path);

extern const char* const kSignalsSuffix;
extern const char* const kIntervalsSuffix;
extern const char* const kMetaSuffix;

}  // namespace rtmpc
