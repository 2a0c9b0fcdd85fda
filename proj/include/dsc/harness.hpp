#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsc/generators.hpp"
#include "dsc/run.hpp"
#include "json.hpp"

namespace dsc {

/// Fixed instance list: planted, uniform and starved, n in 2..64, at most 10^4 edges.
std::vector<GeneratorSpec> acceptance_corpus();

/// Outcome of one checked corpus run.
struct CorpusOutcome {
    GeneratorSpec spec;
    std::optional<RunReport> report;
    std::string error;          // set when the run threw
    std::string lemma;          // violated property, for invariant violations
    std::uint64_t step = 0;
};

/// Runs `policy` with --check over `specs`, `jobs` runs at a time.
std::vector<CorpusOutcome> run_corpus(const std::vector<GeneratorSpec>& specs,
                                      PolicyKind policy, unsigned jobs);

/// Calls fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// Maximum number of disjoint covers by dynamic programming over edge subsets.
/// Independent of exact_opt; throws CapacityError above 20 edges.
std::uint64_t naive_opt(const InstanceSpec& instance);

struct SuiteResult {
    std::string suite;
    bool passed = true;
    std::uint64_t checked = 0;
    std::vector<std::string> failures;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();

    void fail(std::string what);
};

nlohmann::ordered_json suite_to_json(const SuiteResult& result);

struct VerifyOptions {
    std::uint64_t seed = 1;
    unsigned jobs = 1;
};

/// claims, supermartingale, growth, coupon, counters, gain, replay, oracle.
const std::vector<std::string>& suite_names();

/// Throws InputError for an unknown suite.
SuiteResult run_suite(std::string_view name, const VerifyOptions& options);

struct SweepGrid {
    GeneratorKind kind = GeneratorKind::planted;
    std::vector<std::uint64_t> ns;
    std::vector<std::uint64_t> sizes;     // cover count for planted, edge count otherwise
    std::uint64_t edgeSize = 0;           // uniform; 0 means n/2 rounded up
    std::vector<PolicyKind> policies;
    std::vector<std::uint64_t> seeds;     // policy seeds
    std::uint64_t instanceSeed = 1;
    unsigned jobs = 1;
};

struct SweepRow {
    std::uint64_t n = 0;
    std::uint64_t m = 0;  // edges
    std::string policy;
    std::uint64_t seed = 0;
    std::uint64_t gain = 0;
    std::uint64_t delta = 0;
    double ratio = 0.0;
    double r = 0.0;
    bool holds = false;
};

std::vector<SweepRow> run_sweep(const SweepGrid& grid);

std::string sweep_csv_header();
std::string to_csv(const SweepRow& row);

/// "1,2,5" or "1..50" or a mix, e.g. "1..3,8".
std::vector<std::uint64_t> parse_u64_list(std::string_view text);

}  // namespace dsc
