#pragma once

#include <string>
#include <string_view>

#include "ooe/engine.hpp"

namespace ooe {

/// Strict scenario parser: unknown keys, missing required fields and wrong
/// types are all reported, one diagnostic per field ("tasks[1].C: ..."), via
/// ScenarioError. Syntax errors carry the line and column.
Scenario parse_scenario(std::string_view text);

/// Reads and parses a scenario file; the path prefixes syntax diagnostics.
Scenario load_scenario(const std::string& path);

std::string scenario_to_json(const Scenario& sc);

}  // namespace ooe
