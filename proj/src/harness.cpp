#include "dsc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace dsc {

using nlohmann::ordered_json;

std::vector<GeneratorSpec> acceptance_corpus() {
    constexpr std::uint64_t ns[] = {2, 3, 4, 5, 6, 7, 8, 10, 12, 16, 20, 24, 32, 40, 48, 64};
    std::vector<GeneratorSpec> out;
    for (std::uint64_t n : ns) {
        const std::uint64_t big = std::min<std::uint64_t>(300, 17000 / (n + 1));
        for (std::uint64_t seed = 1; seed <= 2; ++seed) {
            for (std::uint64_t covers : {std::uint64_t{4}, std::uint64_t{32}, big}) {
                out.push_back({GeneratorKind::planted, n, covers, 1, seed});
            }
        }
        const std::uint64_t quarter = std::max<std::uint64_t>(1, (n + 3) / 4);
        const std::uint64_t half = std::max<std::uint64_t>(1, (n + 1) / 2);
        out.push_back({GeneratorKind::uniform, n, 200, 1, 1});
        out.push_back({GeneratorKind::uniform, n, 1000, quarter, 2});
        out.push_back({GeneratorKind::uniform, n, 3000, half, 3});
        out.push_back({GeneratorKind::uniform, n, 10000, n, 4});
        for (std::uint64_t m : {100, 1000, 2500}) {
            out.push_back({GeneratorKind::starved, n, m, 1, 0});
        }
    }
    return out;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned j = 0; j < jobs; ++j) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                fn(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

std::vector<CorpusOutcome> run_corpus(const std::vector<GeneratorSpec>& specs,
                                      PolicyKind policy, unsigned jobs) {
    std::vector<CorpusOutcome> out(specs.size());
    parallel_for(specs.size(), jobs, [&](std::size_t i) {
        CorpusOutcome& o = out[i];
        o.spec = specs[i];
        RunOptions options;
        options.policy = policy;
        options.seed = specs[i].seed;
        options.check = true;
        try {
            o.report = run_instance(generate(specs[i]), options).report;
        } catch (const InvariantViolation& e) {
            o.error = e.what();
            o.lemma = e.lemma();
            o.step = e.step();
        } catch (const std::exception& e) {
            o.error = e.what();
        }
    });
    return out;
}

std::uint64_t naive_opt(const InstanceSpec& instance) {
    const std::size_t m = instance.edges.size();
    if (m > 16) {
        throw CapacityError("naive_opt handles at most 16 edges");
    }
    const std::size_t words = (instance.n + 63) / 64;
    const std::size_t subsets = std::size_t{1} << m;
    std::vector<std::uint64_t> covered(subsets * words, 0);
    for (std::size_t mask = 1; mask < subsets; ++mask) {
        const std::size_t low = static_cast<std::size_t>(__builtin_ctzll(mask));
        const std::size_t rest = mask & (mask - 1);
        for (std::size_t w = 0; w < words; ++w) {
            covered[mask * words + w] = covered[rest * words + w];
        }
        for (NodeId v : instance.edges[low]) {
            covered[mask * words + (v - 1) / 64] |= std::uint64_t{1} << ((v - 1) % 64);
        }
    }
    auto is_cover = [&](std::size_t mask) {
        for (std::size_t w = 0; w < words; ++w) {
            const std::uint64_t bits = std::min<std::uint64_t>(64, instance.n - 64 * w);
            const std::uint64_t full = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
            if (covered[mask * words + w] != full) {
                return false;
            }
        }
        return true;
    };

    // best[mask]: most disjoint covers using only edges in mask
    std::vector<std::uint8_t> best(subsets, 0);
    for (std::size_t mask = 1; mask < subsets; ++mask) {
        const std::size_t low = mask & (~mask + 1);
        const std::size_t others = mask ^ low;
        std::uint8_t value = best[others];
        for (std::size_t sub = others;; sub = (sub - 1) & others) {
            const std::size_t cover = sub | low;
            if (is_cover(cover)) {
                value = std::max<std::uint8_t>(value, 1 + best[mask ^ cover]);
            }
            if (sub == 0) {
                break;
            }
        }
        best[mask] = value;
    }
    return best[subsets - 1];
}

void SuiteResult::fail(std::string what) {
    passed = false;
    if (failures.size() < 100) {
        failures.push_back(std::move(what));
    }
}

ordered_json suite_to_json(const SuiteResult& result) {
    ordered_json j;
    j["suite"] = result.suite;
    j["passed"] = result.passed;
    j["checked"] = result.checked;
    j["failures"] = result.failures;
    j["details"] = result.details;
    return j;
}

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string describe_outcome(const CorpusOutcome& o) {
    std::string s = describe(o.spec);
    if (!o.lemma.empty()) {
        s += " step " + std::to_string(o.step) + " " + o.lemma;
    }
    return s + ": " + o.error;
}

SuiteResult suite_claims(const VerifyOptions& options) {
    SuiteResult r;
    std::uint64_t claim1 = 0;
    for (Phase k = 0; k <= 24; ++k) {
        for (std::uint64_t n = 1; n <= 1024; ++n) {
            const double gap = harmonic_gap(k, n);
            const double bound = log_four_e_n(n);
            ++claim1;
            if (gap > bound + 1e-12) {
                r.fail("claim1 k=" + std::to_string(k) + " n=" + std::to_string(n) +
                       " gap=" + fmt(gap) + " > ln(4en)=" + fmt(bound));
            }
        }
    }
    Rng rng(options.seed, 11);
    std::uint64_t claim2 = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 10000; ++t) {
        const double eps = rng.unit();
        const double alpha = eps + (1.0 - eps) * rng.unit();
        const double x = -10.0 + 20.0 * rng.unit();
        const double drop = eps == 0.0 ? 0.0 : eps / alpha;
        const double lhs = alpha * std::exp(x - drop) + (1.0 - alpha) * std::exp(x);
        const double rhs = std::exp(x - eps / 2.0);
        worst = std::max(worst, lhs - rhs);
        ++claim2;
        if (lhs > rhs + 1e-12) {
            r.fail("claim2 eps=" + fmt(eps) + " alpha=" + fmt(alpha) + " x=" + fmt(x) +
                   " lhs=" + fmt(lhs) + " rhs=" + fmt(rhs));
        }
    }
    r.checked = claim1 + claim2;
    r.details["claim1Pairs"] = claim1;
    r.details["claim2Triples"] = claim2;
    r.details["claim2MaxExcess"] = worst;
    return r;
}

// small instances whose reachable states the state-level suites sample
std::vector<GeneratorSpec> small_specs(std::uint64_t seed) {
    return {
        {GeneratorKind::planted, 2, 10, 1, seed},      {GeneratorKind::planted, 4, 10, 1, seed},
        {GeneratorKind::planted, 8, 6, 1, seed},       {GeneratorKind::planted, 16, 4, 1, seed},
        {GeneratorKind::uniform, 3, 150, 2, seed},     {GeneratorKind::uniform, 8, 150, 2, seed},
        {GeneratorKind::uniform, 8, 150, 4, seed},     {GeneratorKind::uniform, 16, 150, 8, seed},
        {GeneratorKind::starved, 4, 150, 1, seed},     {GeneratorKind::starved, 16, 150, 1, seed},
    };
}

SuiteResult suite_supermartingale(const VerifyOptions& options) {
    SuiteResult r;
    std::uint64_t naive_checked = 0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (const GeneratorSpec& spec : small_specs(options.seed)) {
        for (PolicyKind policy : {PolicyKind::det, PolicyKind::rand}) {
            RunOptions run;
            run.policy = policy;
            run.seed = options.seed;
            run.observer = [&](const EngineState& state, const PotentialView& view,
                               const Edge& edge) {
                const std::string where = describe(spec) + " " + to_string(policy) +
                                          " step " + std::to_string(state.step + 1);
                const double expected = exact_expected_phi(state, view, edge);
                const double by_class = exact_expected_phi_classes(state, view, edge);
                const double scale = std::max(view.phi, expected);
                ++r.checked;
                worst_excess = std::max(worst_excess, expected - view.phi);
                if (!(expected <= view.phi + 1e-9)) {
                    r.fail(where + ": E[Phi]=" + fmt(expected) + " > Phi=" + fmt(view.phi));
                }
                if (std::abs(expected - by_class) > 1e-12 * scale) {
                    r.fail(where + ": linear " + fmt(expected) + " vs classes " + fmt(by_class));
                }
                const Phase pS = min_phase(state, edge);
                if (pS + state.h() <= 17) {
                    const double naive = exact_expected_phi_naive(state, view, edge);
                    ++naive_checked;
                    if (std::abs(expected - naive) > 1e-12 * scale) {
                        r.fail(where + ": linear " + fmt(expected) + " vs naive " + fmt(naive));
                    }
                }
            };
            try {
                run_instance(generate(spec), run);
            } catch (const std::exception& e) {
                r.fail(describe(spec) + ": " + e.what());
            }
        }
    }
    if (r.checked < 1000) {
        r.fail("only " + std::to_string(r.checked) + " states sampled");
    }
    r.details["states"] = r.checked;
    r.details["naiveCrossChecks"] = naive_checked;
    r.details["maxExcess"] = worst_excess;
    return r;
}

SuiteResult suite_growth(const VerifyOptions& options) {
    SuiteResult r;
    std::uint64_t inactive = 0;
    for (const GeneratorSpec& spec : small_specs(options.seed)) {
        if (spec.n > 8) {
            continue;
        }
        RunOptions run;
        run.policy = PolicyKind::rand;
        run.seed = options.seed;
        run.observer = [&](const EngineState& state, const PotentialView&, const Edge& edge) {
            const Phase pS = min_phase(state, edge);
            for (NodeId v : edge) {
                const NodeState& ns = state.node(v);
                if (ns.phase > 20) {
                    continue;
                }
                const Rational got = check_growth_probability(state, edge, v);
                Rational want;
                if (ns.phase < pS + state.h()) {
                    const std::uint64_t size = std::uint64_t{1} << ns.phase;
                    want = Rational::of(size - ns.gathered_count(ns.phase),
                                        static_cast<unsigned __int128>(state.h()) * size);
                } else {
                    ++inactive;
                }
                ++r.checked;
                if (!(got == want)) {
                    r.fail(describe(spec) + " step " + std::to_string(state.step + 1) +
                           " node " + std::to_string(v) + ": enumerated " +
                           fmt(got.to_double()) + " vs formula " + fmt(want.to_double()));
                }
            }
        };
        try {
            run_instance(generate(spec), run);
        } catch (const std::exception& e) {
            r.fail(describe(spec) + ": " + e.what());
        }
    }
    if (r.checked < 100) {
        r.fail("only " + std::to_string(r.checked) + " triples sampled");
    }
    r.details["triples"] = r.checked;
    r.details["outsideWindow"] = inactive;
    return r;
}

SuiteResult suite_coupon(const VerifyOptions& options) {
    SuiteResult r;
    r.details["cases"] = ordered_json::array();
    constexpr int trials = 10000;
    for (auto [k, m] : {std::pair<Phase, std::uint64_t>{4, 10}, {6, 50}, {8, 200}}) {
        Rng rng(options.seed, 100 + k);
        const std::uint64_t size = std::uint64_t{1} << k;
        CompensatedSum sum;
        CompensatedSum sum_sq;
        std::vector<std::uint8_t> seen(size);
        for (int t = 0; t < trials; ++t) {
            std::fill(seen.begin(), seen.end(), 0);
            std::uint64_t distinct = 0;
            std::uint64_t draws = 0;
            while (distinct < m) {
                ++draws;
                auto& s = seen[rng.below(size)];
                if (!s) {
                    s = 1;
                    ++distinct;
                }
            }
            sum.add(static_cast<double>(draws));
            sum_sq.add(static_cast<double>(draws) * static_cast<double>(draws));
        }
        const double mean = sum.value() / trials;
        const double var = (sum_sq.value() - trials * mean * mean) / (trials - 1);
        const double se = std::sqrt(var / trials);
        const double expected = d_k(k, m, 1);
        const double z = (mean - expected) / se;
        ++r.checked;
        if (std::abs(z) > 3.0) {
            r.fail("k=" + std::to_string(k) + " m=" + std::to_string(m) + " mean " + fmt(mean) +
                   " vs d_k/h " + fmt(expected) + " (" + fmt(z) + " standard errors)");
        }
        r.details["cases"].push_back(
            {{"k", k}, {"m", m}, {"mean", mean}, {"expected", expected}, {"se", se}, {"z", z}});
    }
    return r;
}

SuiteResult summarize_corpus(const std::vector<CorpusOutcome>& outcomes,
                             const std::vector<std::string>& checks) {
    SuiteResult r;
    std::uint64_t edges = 0;
    for (const CorpusOutcome& o : outcomes) {
        ++r.checked;
        if (!o.report) {
            r.fail(describe_outcome(o));
            continue;
        }
        edges += o.report->edges;
        for (const std::string& name : checks) {
            const auto it = o.report->checks.find(name);
            const std::string status = it == o.report->checks.end() ? "missing" : it->second;
            if (status.rfind("pass", 0) != 0) {
                r.fail(describe(o.spec) + ": " + name + " " + status);
            }
        }
    }
    r.details["instances"] = outcomes.size();
    r.details["edges"] = edges;
    return r;
}

SuiteResult suite_counters(const VerifyOptions& options) {
    return summarize_corpus(run_corpus(acceptance_corpus(), PolicyKind::det, options.jobs),
                            {"lemma7_w_bound", "lemma8_charging", "lemma9_s_bound",
                             "degree_identity", "cascade_invariant", "lemma6_d_bound"});
}

SuiteResult suite_gain(const VerifyOptions& options) {
    const auto outcomes = run_corpus(acceptance_corpus(), PolicyKind::det, options.jobs);
    SuiteResult r = summarize_corpus(
        outcomes, {"lemma1_gain_bound", "gain_le_delta", "potential_invariant",
                   "theorem1_competitive"});
    double worst = std::numeric_limits<double>::infinity();
    for (const CorpusOutcome& o : outcomes) {
        if (o.report) {
            worst = std::min(worst, static_cast<double>(o.report->gain) -
                                        o.report->verdict.deltaBound);
        }
    }
    r.details["minSlackOverDeltaBound"] = worst;
    return r;
}

struct Recorded {
    std::string trace;
    std::string report;
    RunResult result;
};

Recorded record(const InstanceSpec& instance, RunOptions options) {
    std::ostringstream out;
    options.trace = &out;
    Recorded rec{"", "", run_instance(instance, options)};
    rec.trace = out.str();
    rec.report = report_to_json(rec.result.report).dump(2);
    return rec;
}

SuiteResult suite_replay(const VerifyOptions& options) {
    SuiteResult r;
    const std::vector<GeneratorSpec> specs = {
        {GeneratorKind::planted, 8, 32, 1, options.seed},
        {GeneratorKind::uniform, 12, 500, 4, options.seed},
        {GeneratorKind::starved, 6, 300, 1, 0},
    };
    for (const GeneratorSpec& spec : specs) {
        const InstanceSpec instance = generate(spec);
        for (PolicyKind policy : {PolicyKind::det, PolicyKind::rand}) {
            const std::string where = describe(spec) + " " + to_string(policy);
            try {
                RunOptions run;
                run.policy = policy;
                run.seed = 7;
                const Recorded a = record(instance, run);
                const Recorded b = record(instance, run);
                ++r.checked;
                if (a.trace != b.trace || a.report != b.report) {
                    r.fail(where + ": two runs differ");
                }

                std::istringstream in(a.trace);
                RunOptions again;
                again.policy = PolicyKind::replay;
                again.replay = read_trace(in);
                again.replayMeta = meta_from_json(
                    nlohmann::json::parse(meta_to_json(make_trace_meta(a.result)).dump()));
                const Recorded c = record(instance, again);
                ++r.checked;
                if (c.report != a.report) {
                    r.fail(where + ": replayed report differs");
                }
                if (c.trace != a.trace) {
                    r.fail(where + ": replayed trace differs");
                }
                if (state_from_json(nlohmann::json::parse(again.replayMeta->checkpoint.dump())) !=
                    *c.result.finalState) {
                    r.fail(where + ": replayed final state differs from the checkpoint");
                }

                if (policy == PolicyKind::det && again.replay.size() > 2) {
                    // recolor one step with another color of the same palette
                    const std::size_t at = again.replay.size() / 2;
                    TraceEntry& e = again.replay[at];
                    const PaletteRange range = palette_range(e.kstar);
                    if (range.size() > 1) {
                        e.color = e.color == range.lo ? range.lo + 1 : range.lo;
                        ++r.checked;
                        try {
                            record(instance, again);
                            r.fail(where + ": tampered trace replayed without error");
                        } catch (const ReplayError& err) {
                            if (err.step() != e.step) {
                                r.fail(where + ": tampered step " + std::to_string(e.step) +
                                       " reported at " + std::to_string(err.step()));
                            }
                        }
                    }
                }
            } catch (const std::exception& e) {
                r.fail(where + ": " + e.what());
            }
        }
    }
    return r;
}

SuiteResult suite_oracle(const VerifyOptions& options) {
    SuiteResult r;
    Rng rng(options.seed, 21);
    std::uint64_t battery = 0;
    for (int t = 0; t < 50; ++t) {
        InstanceSpec inst;
        inst.n = 1 + rng.below(5);
        const std::uint64_t m = rng.below(9);
        for (std::uint64_t e = 0; e < m; ++e) {
            const std::uint64_t mask = 1 + rng.below((std::uint64_t{1} << inst.n) - 1);
            Edge edge;
            for (NodeId v = 1; v <= inst.n; ++v) {
                if (mask >> (v - 1) & 1) {
                    edge.push_back(v);
                }
            }
            inst.edges.push_back(std::move(edge));
        }
        const OfflineResult got = exact_opt(inst);
        const std::uint64_t want = naive_opt(inst);
        ++battery;
        if (!got.exact || got.opt != want) {
            r.fail("battery " + std::to_string(t) + " " + serialize_instance(inst) +
                   ": exact_opt " + std::to_string(got.opt) + " vs naive " + std::to_string(want));
        }
    }
    std::uint64_t planted = 0;
    for (std::uint64_t n = 2; n <= 4; ++n) {
        for (std::uint64_t covers = 1; covers <= 5; ++covers) {
            for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                const InstanceSpec inst = gen_planted(n, covers, options.seed * 1000 + seed);
                if (inst.edges.size() > 14) {
                    continue;
                }
                const OfflineResult got = exact_opt(inst);
                ++planted;
                if (!got.exact || got.opt < covers) {
                    r.fail("planted n=" + std::to_string(n) + " covers=" + std::to_string(covers) +
                           " seed=" + std::to_string(options.seed * 1000 + seed) + ": opt " +
                           std::to_string(got.opt));
                }
            }
        }
    }
    r.checked = battery + planted;
    r.details["battery"] = battery;
    r.details["planted"] = planted;
    return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {
        "claims", "supermartingale", "growth", "coupon", "counters", "gain", "replay", "oracle",
    };
    return names;
}

SuiteResult run_suite(std::string_view name, const VerifyOptions& options) {
    SuiteResult r;
    if (name == "claims") r = suite_claims(options);
    else if (name == "supermartingale") r = suite_supermartingale(options);
    else if (name == "growth") r = suite_growth(options);
    else if (name == "coupon") r = suite_coupon(options);
    else if (name == "counters") r = suite_counters(options);
    else if (name == "gain") r = suite_gain(options);
    else if (name == "replay") r = suite_replay(options);
    else if (name == "oracle") r = suite_oracle(options);
    else throw InputError("unknown suite: " + std::string(name));
    r.suite = std::string(name);
    return r;
}

std::vector<SweepRow> run_sweep(const SweepGrid& grid) {
    struct Job {
        GeneratorSpec spec;
        PolicyKind policy;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::uint64_t n : grid.ns) {
        for (std::uint64_t size : grid.sizes) {
            GeneratorSpec spec{grid.kind, n, size, 1, grid.instanceSeed};
            if (grid.kind == GeneratorKind::uniform) {
                spec.edgeSize = grid.edgeSize == 0 ? (n + 1) / 2 : std::min(grid.edgeSize, n);
            }
            for (PolicyKind policy : grid.policies) {
                for (std::uint64_t seed : grid.seeds) {
                    jobs.push_back({spec, policy, seed});
                }
            }
        }
    }
    std::vector<SweepRow> rows(jobs.size());
    std::vector<std::string> errors(jobs.size());
    parallel_for(jobs.size(), grid.jobs, [&](std::size_t i) {
        try {
            RunOptions options;
            options.policy = jobs[i].policy;
            options.seed = jobs[i].seed;
            const RunReport rep = run_instance(generate(jobs[i].spec), options).report;
            SweepRow& row = rows[i];
            row.n = rep.n;
            row.m = rep.edges;
            row.policy = rep.policy;
            row.seed = jobs[i].seed;
            row.gain = rep.gain;
            row.delta = rep.minDegree;
            row.ratio = rep.minDegree == 0 ? 0.0
                                           : static_cast<double>(rep.gain) /
                                                 static_cast<double>(rep.minDegree);
            row.r = rep.verdict.r;
            row.holds = rep.verdict.holds;
        } catch (const std::exception& e) {
            errors[i] = describe(jobs[i].spec) + " " + to_string(jobs[i].policy) + ": " + e.what();
        }
    });
    for (const std::string& e : errors) {
        if (!e.empty()) {
            throw Error("sweep run failed: " + e);
        }
    }
    return rows;
}

std::string sweep_csv_header() {
    return "n,m,policy,seed,gain,delta,ratio,bound_r,verdict";
}

std::string to_csv(const SweepRow& row) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%llu,%llu,%s,%llu,%llu,%llu,%.6f,%.6f,%s",
                  static_cast<unsigned long long>(row.n), static_cast<unsigned long long>(row.m),
                  row.policy.c_str(), static_cast<unsigned long long>(row.seed),
                  static_cast<unsigned long long>(row.gain),
                  static_cast<unsigned long long>(row.delta), row.ratio, row.r,
                  row.holds ? "holds" : "fails");
    return buf;
}

std::vector<std::uint64_t> parse_u64_list(std::string_view text) {
    auto number = [&](std::string_view s) {
        std::uint64_t v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
            throw InputError("bad number '" + std::string(s) + "' in list '" +
                             std::string(text) + "'");
        }
        return v;
    };
    std::vector<std::uint64_t> out;
    while (!text.empty()) {
        const std::size_t comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        if (const std::size_t dots = item.find(".."); dots != std::string_view::npos) {
            const std::uint64_t lo = number(item.substr(0, dots));
            const std::uint64_t hi = number(item.substr(dots + 2));
            if (hi < lo || hi - lo > 1000000) {
                throw InputError("bad range '" + std::string(item) + "'");
            }
            for (std::uint64_t v = lo; v <= hi; ++v) {
                out.push_back(v);
            }
        } else {
            out.push_back(number(item));
        }
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    if (out.empty()) {
        throw InputError("empty list");
    }
    return out;
}

}  // namespace dsc
