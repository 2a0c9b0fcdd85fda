#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dsc/engine.hpp"
#include "dsc/potential.hpp"

namespace dsc {

/// Seedable, splittable generator with a portable bounded draw.
///
/// Streams are mt19937_64 engines seeded through splitmix64 of
/// (seed, stream id), so every child stream is a pure function of the pair.
class Rng {
public:
    static constexpr std::string_view kName = "mt19937_64+splitmix64";

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    [[nodiscard]] Rng split(std::uint64_t stream) const { return Rng(seed_, stream); }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound);
    /// Uniform in [0, 1) with 53 random bits.
    double unit();

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct Decision {
    Phase kstar = 0;
    Color color = 0;
    std::uint64_t candidateCount = 0;
    double margin = 0.0;   // Phi^{t-1} - Phi^t for the chosen candidate
    bool nearTie = false;  // runner-up class within 1e-9 relative of the chosen Phi
};

/// k* uniform over the h-window, then a color uniform over R_{k*}.
Decision rand_policy(const EngineState& state, const Edge& edge, Rng& rng);

struct DetOptions {
    bool exhaustive = false;  // scan every color instead of equivalence classes
};

/// Candidate minimizing Phi after the step; ties go to the smaller k*, then
/// the smaller color. Throws InvariantViolation if the minimum exceeds n.
Decision det_policy(const EngineState& state, const PotentialView& view, const Edge& edge,
                    DetOptions options = {});

/// Baseline: one active color until every node has been covered by it.
struct GreedyAux {
    Color active = 1;
    std::vector<std::uint8_t> uncovered;
    std::uint64_t remaining = 0;

    static GreedyAux for_nodes(std::uint64_t n);
};

Color greedy_policy(GreedyAux& aux, const Edge& edge);

/// Fully-used-color bookkeeping for colorings that bypass the engine.
class GatherCounter {
public:
    explicit GatherCounter(std::uint64_t n) : n_(n), degree_(n, 0) {}

    void record(const Edge& edge, Color color);
    [[nodiscard]] std::uint64_t fully_used() const noexcept { return fully_used_; }
    [[nodiscard]] std::uint64_t min_degree() const;

private:
    std::uint64_t n_;
    std::vector<std::uint64_t> degree_;
    std::unordered_map<Color, std::unordered_set<NodeId>> gatherers_;
    std::uint64_t fully_used_ = 0;
};

/// Replay of a recorded trace failed; step() is the first divergent step.
class ReplayError : public Error {
public:
    ReplayError(std::uint64_t step, const std::string& what)
        : Error("replay diverges at step " + std::to_string(step) + ": " + what), step_(step) {}
    [[nodiscard]] std::uint64_t step() const noexcept { return step_; }

private:
    std::uint64_t step_;
};

/// Feeds recorded (k*, color) pairs back into the engine and checks that the
/// recomputed p_S and Phi agree with the recording.
class ReplayPolicy {
public:
    explicit ReplayPolicy(std::vector<TraceEntry> trace) : trace_(std::move(trace)) {}

    Decision decide(const EngineState& state, const Edge& edge);
    /// Compares the Phi reached after the step just applied with the recording.
    void confirm(std::uint64_t step, double phi_after) const;
    [[nodiscard]] bool exhausted() const noexcept { return next_ == trace_.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return trace_.size(); }

private:
    std::vector<TraceEntry> trace_;
    std::size_t next_ = 0;
};

}  // namespace dsc
