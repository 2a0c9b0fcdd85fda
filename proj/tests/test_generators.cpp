#include <gtest/gtest.h>

#include <cmath>

#include "dsc/generators.hpp"
#include "dsc/oracle.hpp"
#include "dsc/run.hpp"

using namespace dsc;

TEST(GenPlanted, ContainsTheCovers) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const InstanceSpec inst = gen_planted(2, 3, seed);
        ASSERT_LE(inst.edges.size(), 6u);
        EXPECT_GE(exact_opt(inst).opt, 3u);
    }
}

TEST(GenPlanted, EveryNodeOncePerRound) {
    const InstanceSpec inst = gen_planted(9, 25, 4);
    EXPECT_EQ(degrees(inst), std::vector<std::uint64_t>(9, 25));
    EXPECT_NO_THROW(validate_instance(inst));
}

TEST(GenPlanted, SingleNodeIsOneEdge) {
    EXPECT_EQ(gen_planted(1, 1, 3).edges, (std::vector<Edge>{{1}}));
}

TEST(GenPlanted, Deterministic) {
    EXPECT_EQ(gen_planted(12, 40, 8), gen_planted(12, 40, 8));
    EXPECT_NE(gen_planted(12, 40, 8), gen_planted(12, 40, 9));
}

TEST(GenUniform, FullSizeIsRepeatedV) {
    EXPECT_EQ(gen_uniform(5, 6, 5, 1), gen_full(5, 6));
}

TEST(GenUniform, DegreeConcentration) {
    const std::uint64_t n = 16, m = 10000, size = 4;
    const InstanceSpec inst = gen_uniform(n, m, size, 3);
    const double p = static_cast<double>(size) / n;
    const double sigma = std::sqrt(m * p * (1 - p));
    for (std::uint64_t d : degrees(inst)) {
        EXPECT_LE(std::abs(static_cast<double>(d) - m * p), 5 * sigma);
    }
    for (const Edge& e : inst.edges) ASSERT_EQ(e.size(), size);
}

TEST(GenUniform, EmptyInstance) {
    const InstanceSpec inst = gen_uniform(6, 0, 3, 1);
    EXPECT_TRUE(inst.edges.empty());
    for (PolicyKind p : {PolicyKind::det, PolicyKind::rand, PolicyKind::greedy}) {
        RunOptions opts;
        opts.policy = p;
        opts.check = true;
        const RunReport r = run_instance(inst, opts).report;
        EXPECT_EQ(r.gain, 0u);
        if (r.maxPhi) {
            EXPECT_EQ(*r.maxPhi, 6.0);
        }
    }
}

TEST(GenUniform, RejectsBadSize) {
    EXPECT_THROW(gen_uniform(4, 3, 5, 1), InputError);
    EXPECT_THROW(gen_uniform(4, 3, 0, 1), InputError);
}

TEST(GenStarved, SmallExample) {
    EXPECT_EQ(gen_starved(2, 4).edges, (std::vector<Edge>{{1}, {1}, {1, 2}, {1}}));
}

TEST(GenStarved, LastNodeHasMinimumDegree) {
    for (std::uint64_t n : {2, 5, 9}) {
        for (std::uint64_t m : {1, 10, 400}) {
            const InstanceSpec inst = gen_starved(n, m);
            EXPECT_EQ(min_degree(inst), degrees(inst).back());
        }
    }
}

TEST(GenStarved, DetBuildsSCounters) {
    const InstanceSpec inst = gen_starved(8, 400);
    const RunResult r = run_instance(inst, {});
    bool any_s = false;
    for (const NodeState& ns : r.finalState->nodes) {
        for (const auto& [k, v] : ns.s) any_s |= v > 0;
    }
    EXPECT_TRUE(any_s);
}

TEST(GeneratorSpec, Parse) {
    const GeneratorSpec a = parse_generator_spec("planted:n=8,covers=32", 5);
    EXPECT_EQ(a.kind, GeneratorKind::planted);
    EXPECT_EQ(a.n, 8u);
    EXPECT_EQ(a.m, 32u);
    EXPECT_EQ(a.seed, 5u);
    const GeneratorSpec b = parse_generator_spec("uniform:n=16,m=1000,size=4,seed=9", 5);
    EXPECT_EQ(b.edgeSize, 4u);
    EXPECT_EQ(b.seed, 9u);
    EXPECT_EQ(parse_generator_spec(describe(b), 0).seed, 9u);
    EXPECT_EQ(generate(parse_generator_spec("full:n=3,m=2", 0)), gen_full(3, 2));
    EXPECT_THROW(parse_generator_spec("bogus:n=3", 0), InputError);
    EXPECT_EQ(parse_generator_kind("starved"), GeneratorKind::starved);
    EXPECT_THROW(parse_generator_kind("planted:n=3"), InputError);
    EXPECT_THROW(parse_generator_spec("planted:n=0,covers=3", 0), InputError);
    EXPECT_THROW(parse_generator_spec("planted:n=3", 0), InputError);
    EXPECT_THROW(parse_generator_spec("uniform:n=3,m=x,size=1", 0), InputError);
}
