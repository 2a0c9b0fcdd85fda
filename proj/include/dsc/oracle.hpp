#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dsc/model.hpp"

namespace dsc {

struct OfflineResult {
    std::uint64_t opt = 0;
    /// Class of every edge (-1 = unused); empty when the result is not exact.
    std::vector<std::int64_t> witness;
    std::uint64_t minDegree = 0;
    bool exact = false;
};

inline constexpr std::size_t kDefaultOptBudget = 14;

/// True iff the selected edges cover every node.
bool is_set_cover(const InstanceSpec& instance, std::span<const std::size_t> edge_indices);

/// Maximum number of disjoint set covers by branch and bound. With more than
/// `budget` edges, returns the delta(E) upper bound with exact = false.
OfflineResult exact_opt(const InstanceSpec& instance, std::size_t budget = kDefaultOptBudget);

/// r = 24 h ln(4e n): the degree scale per completed phase.
double phase_degree_scale(std::uint64_t n);

struct CompetitiveVerdict {
    double r = 0.0;
    double deltaBound = 0.0;           // (delta - r) / (4r)
    bool holds = false;                // gain >= deltaBound
    std::optional<double> deltaRatio;  // gain / delta
    std::optional<double> optBound;    // OPT / (96 h ln(4e n)) - 1/4, exact OPT only
    std::optional<bool> optHolds;
    std::optional<double> optRatio;    // gain / OPT
};

CompetitiveVerdict competitive_check(std::uint64_t gain, std::uint64_t min_degree,
                                     const std::optional<OfflineResult>& offline,
                                     std::uint64_t n);

/// lhs <= rhs with additive slack 1e-9 * max(1, |rhs|).
bool leq_with_slack(double lhs, double rhs);

}  // namespace dsc
