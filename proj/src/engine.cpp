#include "dsc/engine.hpp"

#include <algorithm>
#include <string>

namespace dsc {

bool ColorSet::contains(Color c) const {
    return std::binary_search(colors_.begin(), colors_.end(), c);
}

bool ColorSet::insert(Color c) {
    auto it = std::lower_bound(colors_.begin(), colors_.end(), c);
    if (it != colors_.end() && *it == c) {
        return false;
    }
    colors_.insert(it, c);
    return true;
}

std::uint64_t NodeState::gathered_count(Phase k) const {
    auto it = gathered.find(k);
    return it == gathered.end() ? 0 : it->second.size();
}

const ColorSet* NodeState::gathered_in(Phase k) const {
    auto it = gathered.find(k);
    return it == gathered.end() ? nullptr : &it->second;
}

std::uint64_t NodeState::w_at(Phase k) const {
    auto it = w.find(k);
    return it == w.end() ? 0 : it->second;
}

std::uint64_t NodeState::s_at(Phase k) const {
    auto it = s.find(k);
    return it == s.end() ? 0 : it->second;
}

EngineState init_state(std::uint64_t n) {
    if (n < 1) {
        throw InputError("node count must be positive");
    }
    EngineState state;
    state.params = PaletteParams::for_nodes(n);
    state.nodes.resize(n);
    return state;
}

namespace {

void check_edge(const EngineState& state, const Edge& edge) {
    if (edge.empty()) {
        throw PreconditionError("empty hyperedge");
    }
    for (std::size_t i = 0; i < edge.size(); ++i) {
        if (edge[i] < 1 || edge[i] > state.n()) {
            throw PreconditionError("node id " + std::to_string(edge[i]) + " out of range");
        }
        if (i > 0 && edge[i] <= edge[i - 1]) {
            throw PreconditionError("hyperedge is not a sorted set of node ids");
        }
    }
}

}  // namespace

Phase min_phase(const EngineState& state, const Edge& edge) {
    check_edge(state, edge);
    Phase p = state.node(edge.front()).phase;
    for (NodeId v : edge) {
        p = std::min(p, state.node(v).phase);
    }
    return p;
}

Phase check_candidate(const EngineState& state, const Edge& edge, Phase kstar, Color color) {
    const Phase pS = min_phase(state, edge);
    if (kstar < pS || kstar > pS + state.h() - 1) {
        throw PreconditionError("kstar " + std::to_string(kstar) + " outside window [" +
                                std::to_string(pS) + ", " + std::to_string(pS + state.h() - 1) +
                                "]");
    }
    if (kstar > kMaxPhase) {
        throw OverflowError("phase " + std::to_string(kstar) + " overflows the color space");
    }
    if (!palette_range(kstar).contains(color)) {
        throw PreconditionError("color " + std::to_string(color) + " not in palette " +
                                std::to_string(kstar));
    }
    return pS;
}

StepChange apply_color(EngineState& state, const Edge& edge, Phase kstar, Color color) {
    const Phase pS = check_candidate(state, edge, kstar, color);
    const Phase window_end = pS + state.h() - 1;

    StepChange change{pS, kstar, color, {}};
    change.nodes.reserve(edge.size());
    auto& holders = state.gatherers[color];

    for (NodeId v : edge) {
        NodeState& ns = state.nodes[v - 1];
        NodeChange nc;
        nc.node = v;
        nc.phase_before = ns.phase;
        ++ns.degree;
        if (ns.phase <= window_end) {
            ++ns.w[ns.phase];
            nc.w_incremented = true;
        } else {
            ++ns.s[ns.phase];
        }
        ColorSet& set = ns.gathered[kstar];
        nc.count_before = set.size();
        nc.new_color = set.insert(color);
        if (nc.new_color) {
            holders.insert(std::lower_bound(holders.begin(), holders.end(), v), v);
            if (holders.size() == state.n()) {
                ++state.fully_used;
            }
        }
        while (ns.gathered_count(ns.phase) >= quota(ns.phase, state.n())) {
            ++ns.phase;
        }
        nc.phase_after = ns.phase;
        change.nodes.push_back(nc);
    }
    ++state.step;
    return change;
}

std::uint64_t fully_used_count(const EngineState& state) {
    return state.fully_used;
}

std::int64_t min_completed_phase(const EngineState& state) {
    Phase p = state.nodes.front().phase;
    for (const NodeState& ns : state.nodes) {
        p = std::min(p, ns.phase);
    }
    return static_cast<std::int64_t>(p) - 1;
}

std::uint64_t min_degree(const EngineState& state) {
    std::uint64_t d = state.nodes.front().degree;
    for (const NodeState& ns : state.nodes) {
        d = std::min(d, ns.degree);
    }
    return d;
}

}  // namespace dsc
