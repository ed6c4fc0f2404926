#pragma once

#include <string>
#include <string_view>

#include "rtovc/scenario.hpp"

namespace rtovc {

/// Reads and validates a scenario file. Errors are ConfigError with "path:line: message" text.
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_string(std::string_view text, const std::string& source = "<string>");

/// Canonical text form; parse_config_string(serialize_config(c)) == c.
std::string serialize_config(const ScenarioConfig& cfg);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);
std::string fnv1a_hex(std::string_view text);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace rtovc
