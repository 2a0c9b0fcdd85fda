#include "dsc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dsc {

bool leq_with_slack(double lhs, double rhs) {
    return lhs <= rhs + 1e-9 * std::max(1.0, std::abs(rhs));
}

bool is_set_cover(const InstanceSpec& instance, std::span<const std::size_t> edge_indices) {
    std::vector<std::uint8_t> covered(instance.n, 0);
    std::uint64_t count = 0;
    for (std::size_t idx : edge_indices) {
        if (idx >= instance.edges.size()) {
            throw PreconditionError("edge index " + std::to_string(idx) + " out of range");
        }
        for (NodeId v : instance.edges[idx]) {
            if (!covered[v - 1]) {
                covered[v - 1] = 1;
                ++count;
            }
        }
    }
    return count == instance.n;
}

namespace {

// Decides whether the edges can be split into `classes` disjoint covers.
class CoverPacking {
public:
    CoverPacking(const InstanceSpec& instance, std::uint64_t classes)
        : inst_(instance),
          k_(classes),
          cover_(classes, std::vector<std::uint32_t>(instance.n, 0)),
          uncovered_(classes, instance.n),
          missing_(instance.n, classes),
          remaining_(degrees(instance)),
          assignment_(instance.edges.size(), -1) {
        order_.resize(instance.edges.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            return inst_.edges[a].size() > inst_.edges[b].size();
        });
    }

    bool solve() { return search(0, 0); }
    [[nodiscard]] const std::vector<std::int64_t>& assignment() const { return assignment_; }

private:
    bool search(std::size_t pos, std::uint64_t used) {
        if (std::all_of(uncovered_.begin(), uncovered_.end(),
                        [](std::uint64_t u) { return u == 0; })) {
            return true;
        }
        if (pos == order_.size()) {
            return false;
        }
        const std::size_t idx = order_[pos];
        const Edge& edge = inst_.edges[idx];
        for (NodeId v : edge) {
            --remaining_[v - 1];
        }
        const std::uint64_t limit = std::min(used + 1, k_);
        for (std::uint64_t c = 0; c < limit; ++c) {
            if (!adds_coverage(c, edge)) {
                continue;
            }
            place(c, edge, +1);
            assignment_[idx] = static_cast<std::int64_t>(c);
            if (feasible(edge) && search(pos + 1, std::max(used, c + 1))) {
                restore(edge);
                return true;
            }
            assignment_[idx] = -1;
            place(c, edge, -1);
        }
        bool found = false;
        if (feasible(edge)) {
            found = search(pos + 1, used);
        }
        restore(edge);
        return found;
    }

    bool adds_coverage(std::uint64_t c, const Edge& edge) const {
        return std::any_of(edge.begin(), edge.end(),
                           [&](NodeId v) { return cover_[c][v - 1] == 0; });
    }

    void place(std::uint64_t c, const Edge& edge, int sign) {
        for (NodeId v : edge) {
            auto& cnt = cover_[c][v - 1];
            if (sign > 0) {
                if (cnt++ == 0) {
                    --uncovered_[c];
                    --missing_[v - 1];
                }
            } else if (--cnt == 0) {
                ++uncovered_[c];
                ++missing_[v - 1];
            }
        }
    }

    // every class still missing v needs a distinct unprocessed edge containing v
    bool feasible(const Edge& edge) const {
        return std::all_of(edge.begin(), edge.end(),
                           [&](NodeId v) { return missing_[v - 1] <= remaining_[v - 1]; });
    }

    void restore(const Edge& edge) {
        for (NodeId v : edge) {
            ++remaining_[v - 1];
        }
    }

    const InstanceSpec& inst_;
    std::uint64_t k_;
    std::vector<std::vector<std::uint32_t>> cover_;
    std::vector<std::uint64_t> uncovered_;
    std::vector<std::uint64_t> missing_;
    std::vector<std::uint64_t> remaining_;
    std::vector<std::int64_t> assignment_;
    std::vector<std::size_t> order_;
};

}  // namespace

OfflineResult exact_opt(const InstanceSpec& instance, std::size_t budget) {
    validate_instance(instance);
    OfflineResult result;
    result.minDegree = min_degree(instance);
    if (instance.edges.size() > budget) {
        result.opt = result.minDegree;
        result.exact = false;
        return result;
    }
    result.exact = true;
    result.witness.assign(instance.edges.size(), -1);
    for (std::uint64_t k = result.minDegree; k >= 1; --k) {
        CoverPacking packing(instance, k);
        if (packing.solve()) {
            result.opt = k;
            result.witness = packing.assignment();
            break;
        }
    }
    return result;
}

double phase_degree_scale(std::uint64_t n) {
    const PaletteParams params = PaletteParams::for_nodes(n);
    return 24.0 * params.h * log_four_e_n(n);
}

CompetitiveVerdict competitive_check(std::uint64_t gain, std::uint64_t min_degree,
                                     const std::optional<OfflineResult>& offline,
                                     std::uint64_t n) {
    CompetitiveVerdict v;
    v.r = phase_degree_scale(n);
    const double g = static_cast<double>(gain);
    v.deltaBound = (static_cast<double>(min_degree) - v.r) / (4.0 * v.r);
    v.holds = leq_with_slack(v.deltaBound, g);
    if (min_degree > 0) {
        v.deltaRatio = g / static_cast<double>(min_degree);
    }
    if (offline && offline->exact) {
        const PaletteParams params = PaletteParams::for_nodes(n);
        v.optBound = static_cast<double>(offline->opt) / (96.0 * params.h * log_four_e_n(n)) - 0.25;
        v.optHolds = leq_with_slack(*v.optBound, g);
        if (offline->opt > 0) {
            v.optRatio = g / static_cast<double>(offline->opt);
        }
    }
    return v;
}

}  // namespace dsc
