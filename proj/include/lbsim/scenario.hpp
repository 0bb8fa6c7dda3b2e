#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lbsim/model.hpp"

namespace lbsim {

/// Parses a flat `key: value` scenario document. A `preset` key is applied
/// first wherever it appears; the remaining keys override it. Blank lines
/// and `#` comments are ignored.
///
/// Defaults: node_count 1024, duration 3000 s, update_period 1 s,
/// hop_delay 0.5 s, max_tree_depth 5, window 1 s, overload_window 4 s,
/// load_window 2.5 s, seed 1. Several pairs may share a line when
/// separated by commas.
///
/// Throws ConfigError with the line number on syntax errors and unknown
/// keys, and with the field name on semantic violations.
ScenarioConfig parse_scenario(std::string_view text);

/// Emits every field explicitly so parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& config);

std::vector<std::string> list_presets();

/// Throws ConfigError("unknown preset ...") for names not in list_presets().
ScenarioConfig preset(std::string_view name);

}  // namespace lbsim
