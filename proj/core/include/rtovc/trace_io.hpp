#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rtovc/scenario.hpp"
#include "rtovc/simulator.hpp"

namespace rtovc {

inline constexpr int kTraceVersion = 1;

struct TraceColumn {
    const char* name;
    const char* unit;
};

/// Column schema in file order.
const std::vector<TraceColumn>& trace_columns();

struct TraceFile {
    int version = kTraceVersion;
    std::string config_hash;
    std::string config_text;
    SimTrace trace;

    /// Parses the embedded config; throws ConfigError if it no longer matches the header hash.
    ScenarioConfig config() const;
    /// Returns (t, value) pairs of one column for one wheel. Throws std::out_of_range on unknown names.
    std::vector<std::pair<double, double>> signal(const std::string& name, std::uint32_t wheel) const;
};

void write_trace(std::ostream& out, const ScenarioConfig& cfg, const SimTrace& trace);
void write_trace_file(const std::string& path, const ScenarioConfig& cfg, const SimTrace& trace);

/// Throws ConfigError on malformed input, with the offending line number.
TraceFile read_trace(std::istream& in, const std::string& source = "<stream>");
TraceFile read_trace_file(const std::string& path);

}  // namespace rtovc
