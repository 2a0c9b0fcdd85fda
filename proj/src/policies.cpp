#include "dsc/policies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace dsc {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), engine_(splitmix64(seed ^ splitmix64(stream))) {}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) {
        throw DomainError("Rng::below needs a positive bound");
    }
    // reject the low (2^64 mod bound) outputs so every residue is equally likely
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = engine_();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

double Rng::unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

namespace {

std::uint64_t window_colors(Phase pS, std::uint32_t h) {
    std::uint64_t total = 0;
    for (Phase k = pS; k < pS + h; ++k) {
        const std::uint64_t size = palette_range(k).size();
        total = total > std::numeric_limits<std::uint64_t>::max() - size
                    ? std::numeric_limits<std::uint64_t>::max()
                    : total + size;
    }
    return total;
}

bool near(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::abs(b);
}

}  // namespace

Decision rand_policy(const EngineState& state, const Edge& edge, Rng& rng) {
    const Phase pS = min_phase(state, edge);
    Decision d;
    d.kstar = pS + static_cast<Phase>(rng.below(state.h()));
    const PaletteRange range = palette_range(d.kstar);
    d.color = range.lo + rng.below(range.size());
    d.candidateCount = window_colors(pS, state.h());
    return d;
}

Decision det_policy(const EngineState& state, const PotentialView& view, const Edge& edge,
                    DetOptions options) {
    const Phase pS = min_phase(state, edge);

    struct Best {
        double phi = std::numeric_limits<double>::infinity();
        Phase kstar = 0;
        Color color = 0;
    } best;
    // smallest Phi value strictly above the best one, for the near-tie flag
    double runner_up = std::numeric_limits<double>::infinity();

    // candidates are visited in increasing (kstar, color), so strict < keeps the
    // lexicographically smallest among equal Phi values
    auto consider = [&](Phase k, Color c, double phi) {
        if (phi < best.phi) {
            runner_up = best.phi;
            best = {phi, k, c};
        } else if (phi > best.phi && phi < runner_up) {
            runner_up = phi;
        }
    };

    const CandidateScorer scorer(state, view, edge);
    for (Phase k = pS; k < pS + state.h(); ++k) {
        const auto palette = scorer.palette(k);
        if (options.exhaustive) {
            const PaletteRange range = palette_range(k);
            if (range.size() > (std::uint64_t{1} << 24)) {
                throw CapacityError("palette " + std::to_string(k) +
                                    " too large for exhaustive DET scan");
            }
            for (Color c = range.lo; c <= range.hi; ++c) {
                consider(k, c, scorer.phi(palette, c));
            }
            continue;
        }
        // fresh class wins outright once every holder's loss clears the tie tolerance
        if (const auto fresh = smallest_fresh_color(state, edge, k)) {
            const double fresh_phi = scorer.phi_for_holders(palette, {});
            double min_gap = std::numeric_limits<double>::infinity();
            for (std::size_t pos = 0; pos < edge.size(); ++pos) {
                if (palette.held[pos] > 0) {
                    min_gap = std::min(min_gap, palette.keep[pos] - palette.gather[pos]);
                }
            }
            if (min_gap > 2e-9 * fresh_phi) {
                consider(k, *fresh, fresh_phi);
                continue;
            }
        }
        // Phi of a class exceeds the fresh value by its holders' gaps; only classes
        // within the tie tolerance of the cheapest one need an exact evaluation
        const auto classes = color_classes(state, edge, k);
        std::vector<double> cost(classes.size(), 0.0);
        double cheapest = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < classes.size(); ++c) {
            for (std::size_t pos : classes[c].holders) {
                cost[c] += palette.keep[pos] - palette.gather[pos];
            }
            cheapest = std::min(cheapest, cost[c]);
        }
        double base = scorer.outside();
        for (double g : palette.gather) {
            base += g;
        }
        const double slack = 4e-9 * (base + cheapest);
        for (std::size_t c = 0; c < classes.size(); ++c) {
            if (cost[c] <= cheapest + slack) {
                consider(k, classes[c].representative,
                         scorer.phi_for_holders(palette, classes[c].holders));
            }
        }
    }

    Decision d;
    d.kstar = best.kstar;
    d.color = best.color;
    d.candidateCount = window_colors(pS, state.h());
    d.margin = view.phi - best.phi;
    d.nearTie = std::isfinite(runner_up) && near(runner_up, best.phi);
    const double n = static_cast<double>(state.n());
    if (best.phi > n * (1.0 + 1e-9)) {
        throw InvariantViolation(state.step + 1, "potential invariant (Phi <= n)",
                                 "best candidate leaves Phi = " + std::to_string(best.phi) +
                                     " > n = " + std::to_string(state.n()));
    }
    return d;
}

GreedyAux GreedyAux::for_nodes(std::uint64_t n) {
    GreedyAux aux;
    aux.uncovered.assign(n, 1);
    aux.remaining = n;
    return aux;
}

Color greedy_policy(GreedyAux& aux, const Edge& edge) {
    const Color color = aux.active;
    for (NodeId v : edge) {
        if (aux.uncovered.at(v - 1)) {
            aux.uncovered[v - 1] = 0;
            --aux.remaining;
        }
    }
    if (aux.remaining == 0) {
        ++aux.active;
        std::fill(aux.uncovered.begin(), aux.uncovered.end(), 1);
        aux.remaining = aux.uncovered.size();
    }
    return color;
}

void GatherCounter::record(const Edge& edge, Color color) {
    auto& holders = gatherers_[color];
    for (NodeId v : edge) {
        ++degree_.at(v - 1);
        if (holders.insert(v).second && holders.size() == n_) {
            ++fully_used_;
        }
    }
}

std::uint64_t GatherCounter::min_degree() const {
    return *std::min_element(degree_.begin(), degree_.end());
}

Decision ReplayPolicy::decide(const EngineState& state, const Edge& edge) {
    const std::uint64_t step = state.step + 1;
    if (next_ >= trace_.size()) {
        throw ReplayError(step, "trace has only " + std::to_string(trace_.size()) + " entries");
    }
    const TraceEntry& entry = trace_[next_];
    if (entry.step != step) {
        throw ReplayError(step, "trace entry is numbered " + std::to_string(entry.step));
    }
    if (entry.edge != edge) {
        throw ReplayError(step, "recorded hyperedge differs from the instance");
    }
    const Phase pS = min_phase(state, edge);
    if (entry.pS != pS) {
        throw ReplayError(step, "recorded pS " + std::to_string(entry.pS) + ", recomputed " +
                                    std::to_string(pS));
    }
    try {
        check_candidate(state, edge, entry.kstar, entry.color);
    } catch (const Error& e) {
        throw ReplayError(step, std::string("recorded candidate is illegal: ") + e.what());
    }
    ++next_;
    Decision d;
    d.kstar = entry.kstar;
    d.color = entry.color;
    d.candidateCount = 1;
    return d;
}

void ReplayPolicy::confirm(std::uint64_t step, double phi_after) const {
    const TraceEntry& entry = trace_.at(step - 1);
    if (entry.phiAfter != phi_after) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "recorded Phi %.17g, recomputed %.17g", entry.phiAfter,
                      phi_after);
        throw ReplayError(step, buf);
    }
}

}  // namespace dsc
