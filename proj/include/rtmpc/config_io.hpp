#pragma once

#include <string>

#include "rtmpc/closed_loop.hpp"

namespace rtmpc {

/// Canonical text form of a scenario: "[section]" headers and "key = value"
/// lines, every field spelled out. parse_scenario(serialize_scenario(c))
/// reproduces c exactly.
std::string serialize_scenario(const ScenarioConfig<double>& config);

ScenarioConfig<double> parse_scenario(const std::string& text);

ScenarioConfig<double> load_scenario_file(const std::string& path);

/// Apply one "section.key=value" assignment on top of a config.
void apply_override(ScenarioConfig<double>& config, const std::string& assignment);

}  // namespace rtmpc
