#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dsc/engine.hpp"
#include "json.hpp"

namespace dsc {

/// One trace line: {"step","edge","pS","kstar","color","phiAfter"} in that order.
std::string format_trace_line(const TraceEntry& entry);
TraceEntry parse_trace_line(std::string_view line);

/// Reads a whole trace; blank lines are ignored.
std::vector<TraceEntry> read_trace(std::istream& in);

/// Run metadata written next to a trace (`<trace>.meta.json`).
struct TraceMeta {
    std::string policy;
    std::uint64_t seed = 0;
    std::string rng;
    std::string instanceDigest;
    std::uint64_t steps = 0;
    nlohmann::ordered_json checkpoint;  // final EngineState
};

std::string sidecar_path(const std::string& trace_path);

nlohmann::ordered_json meta_to_json(const TraceMeta& meta);
TraceMeta meta_from_json(const nlohmann::json& doc);

/// Checkpoint of an engine state; the inverse of state_from_json.
nlohmann::ordered_json state_to_json(const EngineState& state);
EngineState state_from_json(const nlohmann::json& doc);

}  // namespace dsc
