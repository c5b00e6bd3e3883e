#pragma once

#include "lpwan/engine.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace lpwan {

/// Reads `key = value` lines ('#' starts a comment) on top of the defaults.
/// Errors carry the offending line number: "line 7: unknown key 'foo'".
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::string& path);

/// Applies one key. Used by the parser and by CLI overrides.
void apply_config_key(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Every key with its current value, in a stable order; parse_config() of the joined lines round-trips.
std::vector<std::string> config_lines(const ScenarioConfig& config);

/// Names of all accepted keys.
std::vector<std::string_view> config_keys();

} // namespace lpwan
