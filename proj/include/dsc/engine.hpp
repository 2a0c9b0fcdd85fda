#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "dsc/model.hpp"

namespace dsc {

/// Sorted set of colors backed by a vector.
class ColorSet {
public:
    [[nodiscard]] bool contains(Color c) const;
    /// Returns true when `c` was not already present.
    bool insert(Color c);
    [[nodiscard]] std::size_t size() const noexcept { return colors_.size(); }
    [[nodiscard]] bool empty() const noexcept { return colors_.empty(); }
    [[nodiscard]] const std::vector<Color>& values() const noexcept { return colors_; }
    [[nodiscard]] auto begin() const noexcept { return colors_.begin(); }
    [[nodiscard]] auto end() const noexcept { return colors_.end(); }

    friend bool operator==(const ColorSet&, const ColorSet&) = default;

private:
    std::vector<Color> colors_;
};

/// Per-node progress. Maps are sparse: only touched phases have entries.
struct NodeState {
    Phase phase = 0;
    std::map<Phase, ColorSet> gathered;
    std::map<Phase, std::uint64_t> w;
    std::map<Phase, std::uint64_t> s;
    std::uint64_t degree = 0;

    /// |C_{i,k}|
    [[nodiscard]] std::uint64_t gathered_count(Phase k) const;
    [[nodiscard]] const ColorSet* gathered_in(Phase k) const;
    [[nodiscard]] std::uint64_t w_at(Phase k) const;
    [[nodiscard]] std::uint64_t s_at(Phase k) const;

    friend bool operator==(const NodeState&, const NodeState&) = default;
};

/// Online state of Algorithm-1 style coloring, excluding the color choice.
struct EngineState {
    std::uint64_t step = 0;
    PaletteParams params;
    std::vector<NodeState> nodes;  // index 0 holds node 1
    std::unordered_map<Color, std::vector<NodeId>> gatherers;  // sorted node lists
    std::uint64_t fully_used = 0;

    [[nodiscard]] std::uint64_t n() const noexcept { return params.n; }
    [[nodiscard]] std::uint32_t h() const noexcept { return params.h; }
    [[nodiscard]] const NodeState& node(NodeId id) const { return nodes.at(id - 1); }

    friend bool operator==(const EngineState&, const EngineState&) = default;
};

/// One line of the trace file.
struct TraceEntry {
    std::uint64_t step = 0;
    Edge edge;
    Phase pS = 0;
    Phase kstar = 0;
    Color color = 0;
    double phiAfter = 0.0;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// What apply_color did to one member of the edge.
struct NodeChange {
    NodeId node = 0;
    Phase phase_before = 0;
    bool w_incremented = false;   // otherwise s was incremented
    bool new_color = false;
    std::uint64_t count_before = 0;  // |C_{i,kstar}| before the step
    Phase phase_after = 0;
};

struct StepChange {
    Phase pS = 0;
    Phase kstar = 0;
    Color color = 0;
    std::vector<NodeChange> nodes;
};

EngineState init_state(std::uint64_t n);

/// p_S: the smallest current phase among the members of `edge`.
Phase min_phase(const EngineState& state, const Edge& edge);

/// Throws PreconditionError unless `edge` is a valid nonempty node set and
/// (kstar, color) is a legal candidate for it. Returns p_S.
Phase check_candidate(const EngineState& state, const Edge& edge, Phase kstar, Color color);

/// Colors `edge` with `color` from palette `kstar` and advances phases,
/// cascading while a node already holds its quota for the new phase.
StepChange apply_color(EngineState& state, const Edge& edge, Phase kstar, Color color);

/// Number of colors gathered by all n nodes.
std::uint64_t fully_used_count(const EngineState& state);

/// Largest l such that every node has completed phase l; -1 if none.
std::int64_t min_completed_phase(const EngineState& state);

/// Smallest current degree.
std::uint64_t min_degree(const EngineState& state);

}  // namespace dsc
