#include <gtest/gtest.h>

#include "dsc/generators.hpp"
#include "dsc/harness.hpp"
#include "dsc/oracle.hpp"
#include "dsc/policies.hpp"
#include "oracles.hpp"

using namespace dsc;

namespace {

InstanceSpec random_instance(Rng& rng, std::uint64_t max_n, std::uint64_t max_m) {
    InstanceSpec inst;
    inst.n = 1 + rng.below(max_n);
    const std::uint64_t m = rng.below(max_m + 1);
    for (std::uint64_t e = 0; e < m; ++e) {
        const std::uint64_t mask = 1 + rng.below((std::uint64_t{1} << inst.n) - 1);
        Edge edge;
        for (NodeId v = 1; v <= inst.n; ++v) {
            if (mask >> (v - 1) & 1) edge.push_back(v);
        }
        inst.edges.push_back(edge);
    }
    return inst;
}

}  // namespace

TEST(IsSetCover, Examples) {
    const InstanceSpec two = parse_instance(R"({"n":2,"edges":[[1],[2]]})");
    const std::vector<std::size_t> both{0, 1}, first{0}, none;
    EXPECT_TRUE(is_set_cover(two, both));
    EXPECT_FALSE(is_set_cover(two, first));
    EXPECT_FALSE(is_set_cover(two, none));
    const std::vector<std::size_t> bad{5};
    EXPECT_THROW(is_set_cover(two, bad), PreconditionError);
}

TEST(ExactOpt, Examples) {
    const OfflineResult a = exact_opt(parse_instance(R"({"n":2,"edges":[[1],[2],[1,2]]})"));
    EXPECT_TRUE(a.exact);
    EXPECT_EQ(a.opt, 2u);
    EXPECT_EQ(exact_opt(gen_full(4, 7)).opt, 7u);
    EXPECT_EQ(exact_opt(parse_instance(R"({"n":3,"edges":[[1,2],[1],[2]]})")).opt, 0u);
    EXPECT_EQ(exact_opt(parse_instance(R"({"n":3,"edges":[]})")).opt, 0u);
}

TEST(ExactOpt, WitnessIsAPacking) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const InstanceSpec inst = gen_planted(2 + seed % 5, 2 + seed % 3, seed);
        if (inst.edges.size() > kDefaultOptBudget) continue;
        const OfflineResult r = exact_opt(inst);
        ASSERT_TRUE(r.exact);
        ASSERT_EQ(r.witness.size(), inst.edges.size());
        std::map<std::int64_t, std::vector<std::size_t>> classes;
        for (std::size_t i = 0; i < r.witness.size(); ++i) {
            if (r.witness[i] >= 0) classes[r.witness[i]].push_back(i);
        }
        std::uint64_t covers = 0;
        for (const auto& [c, idx] : classes) covers += is_set_cover(inst, idx);
        EXPECT_EQ(covers, r.opt);
    }
}

TEST(ExactOpt, BudgetFallsBackToDegreeBound) {
    const InstanceSpec inst = gen_uniform(4, 40, 2, 1);
    const OfflineResult r = exact_opt(inst, 10);
    EXPECT_FALSE(r.exact);
    EXPECT_EQ(r.opt, min_degree(inst));
    EXPECT_TRUE(r.witness.empty());
}

TEST(ExactOpt, AgreesWithBruteForce) {
    Rng rng(17);
    for (int t = 0; t < 60; ++t) {
        const InstanceSpec inst = random_instance(rng, 4, 7);
        const std::uint64_t want = oracle::brute_opt(inst);
        EXPECT_EQ(exact_opt(inst).opt, want) << serialize_instance(inst);
        EXPECT_EQ(naive_opt(inst), want) << serialize_instance(inst);
    }
}

TEST(ExactOpt, PlantedCoversAreFound) {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const std::uint64_t covers = 1 + seed % 4;
        const InstanceSpec inst = gen_planted(2 + seed % 4, covers, seed);
        if (inst.edges.size() > 14) continue;
        EXPECT_GE(exact_opt(inst).opt, covers);
    }
}

TEST(CompetitiveCheck, TrivialBelowScale) {
    const double r = phase_degree_scale(8);
    EXPECT_NEAR(r, 24.0 * 3 * std::log(4 * std::exp(1.0) * 8), 1e-9);
    const CompetitiveVerdict v = competitive_check(0, static_cast<std::uint64_t>(r), std::nullopt, 8);
    EXPECT_TRUE(v.holds);
    EXPECT_LE(v.deltaBound, 0.0);
}

TEST(CompetitiveCheck, ZeroGainAtTwiceScaleFails) {
    const double r = phase_degree_scale(8);
    const auto delta = static_cast<std::uint64_t>(std::ceil(2 * r));
    const CompetitiveVerdict v = competitive_check(0, delta, std::nullopt, 8);
    EXPECT_FALSE(v.holds);
    EXPECT_NEAR(v.deltaBound, (delta - r) / (4 * r), 1e-12);
    EXPECT_GE(v.deltaBound, 0.25);
}

TEST(CompetitiveCheck, OptBoundOnlyWithExactOpt) {
    OfflineResult off;
    off.opt = 10;
    off.exact = true;
    const CompetitiveVerdict v = competitive_check(1, 10, off, 4);
    ASSERT_TRUE(v.optBound.has_value());
    EXPECT_NEAR(*v.optBound, 10 / (96.0 * 2 * std::log(16 * std::exp(1.0))) - 0.25, 1e-12);
    EXPECT_TRUE(*v.optHolds);
    EXPECT_DOUBLE_EQ(*v.optRatio, 0.1);
    off.exact = false;
    EXPECT_FALSE(competitive_check(1, 10, off, 4).optBound.has_value());
}
