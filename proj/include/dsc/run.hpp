#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsc/engine.hpp"
#include "dsc/oracle.hpp"
#include "dsc/policies.hpp"
#include "dsc/potential.hpp"
#include "dsc/trace.hpp"
#include "json.hpp"

namespace dsc {

enum class PolicyKind { det, rand, greedy, replay };

PolicyKind parse_policy(std::string_view name);
std::string to_string(PolicyKind kind);

/// Tracked Phi is rebuilt from scratch at every multiple of this step count.
inline constexpr std::uint64_t kResyncInterval = 1024;

/// Called before each engine step with the state the step starts from.
using StepObserver =
    std::function<void(const EngineState&, const PotentialView&, const Edge&)>;

struct RunOptions {
    PolicyKind policy = PolicyKind::det;
    std::uint64_t seed = 0;
    bool check = false;       // per-step invariant assertions
    bool exhaustive = false;  // DET scans every color
    bool timing = false;      // include wall time in the report
    std::ostream* trace = nullptr;
    std::vector<TraceEntry> replay;          // PolicyKind::replay only
    std::optional<TraceMeta> replayMeta;     // original policy and seed, if known
    std::size_t optBudget = kDefaultOptBudget;
    StepObserver observer;
};

struct RunReport {
    std::string instanceDigest;
    std::string policy;
    std::uint64_t seed = 0;
    std::string rng;
    std::uint64_t n = 0;
    std::uint64_t edges = 0;
    std::uint64_t gain = 0;
    std::uint64_t minDegree = 0;
    std::optional<std::int64_t> minCompletedPhase;
    std::optional<double> maxPhi;
    std::optional<double> finalPhi;
    std::optional<double> minMargin;
    std::uint64_t nearTies = 0;
    std::optional<bool> potentialInvariantHeld;  // Phi^t <= n for every t
    CompetitiveVerdict verdict;
    OfflineResult offline;
    std::map<std::string, std::string> checks;
    std::optional<double> wallTimeMs;
};

nlohmann::ordered_json report_to_json(const RunReport& report);

struct RunResult {
    RunReport report;
    std::optional<EngineState> finalState;  // absent for greedy
};

/// Streams the instance through the engine and the chosen policy.
/// Throws InvariantViolation (with --check) or ReplayError.
RunResult run_instance(const InstanceSpec& instance, const RunOptions& options);

/// Metadata to store beside the trace of a finished run.
TraceMeta make_trace_meta(const RunResult& result);

}  // namespace dsc
