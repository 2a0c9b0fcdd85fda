// Acceptance run: one PASS/FAIL line per criterion. Bounds and reference
// values are recomputed here from the definitions (see oracles.hpp).
#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "dsc/harness.hpp"
#include "oracles.hpp"

using namespace dsc;

namespace {

struct Criterion {
    int id = 0;
    std::string name;
    bool ok = true;
    std::uint64_t checked = 0;
    std::uint64_t failures = 0;
    std::string first;
    std::string note;

    void fail(const std::string& what) {
        ok = false;
        if (failures++ == 0) first = what;
    }
    void expect(bool cond, const std::string& what) {
        ++checked;
        if (!cond) fail(what);
    }
};

std::string fmt(long double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

std::vector<std::uint64_t> oracle_degrees(const InstanceSpec& inst) {
    std::vector<std::uint64_t> deg(inst.n, 0);
    for (const Edge& e : inst.edges) {
        for (NodeId v : e) ++deg[v - 1];
    }
    return deg;
}

std::uint64_t oracle_delta(const InstanceSpec& inst) {
    const auto deg = oracle_degrees(inst);
    return *std::min_element(deg.begin(), deg.end());
}

std::int64_t oracle_mcp(const EngineState& s) {
    Phase lo = s.nodes[0].phase;
    for (const NodeState& ns : s.nodes) lo = std::min(lo, ns.phase);
    return static_cast<std::int64_t>(lo) - 1;
}

// Follows one DET corpus run through the observer.
class Tracker {
public:
    Tracker(const InstanceSpec& inst, std::string where, Criterion& c1, Criterion& c2,
            Criterion& c4, Criterion& c6)
        : n_(inst.n), h_(oracle::window(inst.n)), where_(std::move(where)),
          c1_(c1), c2_(c2), c4_(c4), c6_(c6) {}

    void observe(const EngineState& s, const PotentialView& view, const Edge& edge) {
        settle(s);
        c1_.expect(view.phi <= static_cast<double>(n_) * (1 + 1e-9),
                   where_ + " step " + std::to_string(s.step) + ": Phi=" + fmt(view.phi));
        if (n_ <= 16 && s.step % 29 == 0) {
            supermartingale(s, view, edge);
        }
        prev_ = edge;
        prev_w_.clear();
        for (NodeId v : edge) prev_w_.push_back(s.node(v).w);
    }

    void finish(const EngineState& s, double final_phi) {
        settle(s);
        const long double want = oracle::phi(s);
        c1_.expect(final_phi <= static_cast<double>(n_) * (1 + 1e-9) &&
                       std::abs(final_phi - want) <= 1e-9L * want,
                   where_ + " final Phi=" + fmt(final_phi) + " oracle " + fmt(want));
        counters(s);
    }

    std::uint64_t sampled() const { return sampled_; }

private:
    // Checks for the step just applied: Lemma 1 and Lemma 8.
    void settle(const EngineState& s) {
        for (std::size_t i = 0; i < prev_.size(); ++i) {
            const NodeState& ns = s.node(prev_[i]);
            for (const auto& [k, v] : prev_w_[i]) add(k, -static_cast<std::int64_t>(v));
            for (const auto& [k, v] : ns.w) add(k, static_cast<std::int64_t>(v));
        }
        for (NodeId v : prev_) {
            for (const auto& [l, sv] : s.node(v).s) {
                std::uint64_t rhs = 0;
                for (Phase r = 0; l >= h_ && r <= l - h_ && r < w_total_.size(); ++r) {
                    rhs += w_total_[r];
                }
                c6_.expect(sv <= rhs, where_ + " step " + std::to_string(s.step) + " node " +
                                          std::to_string(v) + ": s_" + std::to_string(l) + "=" +
                                          std::to_string(sv) + " > " + std::to_string(rhs));
            }
        }
        const std::int64_t mcp = oracle_mcp(s);
        if (mcp >= 1) {
            std::uint64_t used = fully_used_count(s);
            if (mcp > last_mcp_) {
                used = oracle::fully_used(s);
            }
            c4_.expect(used >= std::uint64_t{1} << (mcp - 1),
                       where_ + " step " + std::to_string(s.step) + ": mcp=" +
                           std::to_string(mcp) + " fully used " + std::to_string(used));
        }
        last_mcp_ = std::max(last_mcp_, mcp);
    }

    void add(Phase k, std::int64_t d) {
        if (w_total_.size() <= k) w_total_.resize(k + 1, 0);
        w_total_[k] = static_cast<std::uint64_t>(static_cast<std::int64_t>(w_total_[k]) + d);
    }

    void supermartingale(const EngineState& s, const PotentialView& view, const Edge& edge) {
        const double e = exact_expected_phi(s, view, edge);
        const std::string at = where_ + " step " + std::to_string(s.step + 1);
        c2_.expect(e <= view.phi + 1e-9, at + ": E=" + fmt(e) + " > Phi=" + fmt(view.phi));
        ++sampled_;
        const Phase top = min_phase(s, edge) + s.h();
        if (top <= 7) {
            const long double want = oracle::expected_phi(s, edge);
            c2_.expect(std::abs(e - want) <= 1e-10L * view.phi,
                       at + ": E=" + fmt(e) + " oracle " + fmt(want));
        } else if (top <= 16) {
            const double naive = exact_expected_phi_naive(s, view, edge);
            c2_.expect(std::abs(e - naive) <= 1e-10 * view.phi,
                       at + ": E=" + fmt(e) + " naive " + fmt(naive));
        }
    }

    // End-of-run prefix sums of w and s.
    void counters(const EngineState& s) {
        const long double unit = h_ * oracle::log_term(n_);
        for (std::size_t i = 0; i < s.nodes.size(); ++i) {
            const NodeState& ns = s.nodes[i];
            Phase top = 0;
            if (!ns.w.empty()) top = std::max(top, ns.w.rbegin()->first);
            if (!ns.s.empty()) top = std::max(top, ns.s.rbegin()->first);
            std::uint64_t w = 0, sv = 0;
            for (Phase l = 0; l <= top; ++l) {
                w += ns.w_at(l);
                sv += ns.s_at(l);
                const long double scale = std::ldexp(1.0L, static_cast<int>(l));
                c6_.expect(w <= 8 * unit * scale && sv <= 16 * unit * scale,
                           where_ + " node " + std::to_string(i + 1) + " l=" + std::to_string(l) +
                               ": w=" + std::to_string(w) + " s=" + std::to_string(sv));
            }
        }
    }

    std::uint64_t n_;
    std::uint32_t h_;
    std::string where_;
    Criterion &c1_, &c2_, &c4_, &c6_;
    std::vector<std::uint64_t> w_total_;
    Edge prev_;
    std::vector<std::map<Phase, std::uint64_t>> prev_w_;
    std::int64_t last_mcp_ = -1;
    std::uint64_t sampled_ = 0;
};

void corpus(Criterion& c1, Criterion& c2, Criterion& c4, Criterion& c5, Criterion& c6) {
    const auto specs = acceptance_corpus();
    std::uint64_t edges = 0;
    std::uint64_t sampled = 0;
    std::uint64_t with_opt = 0;
    for (const GeneratorSpec& spec : specs) {
        const InstanceSpec inst = generate(spec);
        edges += inst.edges.size();
        const std::string where = describe(spec);
        Tracker tracker(inst, where, c1, c2, c4, c6);
        RunOptions opts;
        opts.check = true;
        opts.observer = [&](const EngineState& s, const PotentialView& v, const Edge& e) {
            tracker.observe(s, v, e);
        };
        try {
            const RunResult res = run_instance(inst, opts);
            tracker.finish(*res.finalState, *res.report.finalPhi);
            sampled += tracker.sampled();

            const std::uint64_t delta = oracle_delta(inst);
            const long double r = 24.0L * oracle::window(inst.n) * oracle::log_term(inst.n);
            const long double bound = (delta - r) / (4 * r);
            c5.expect(res.report.gain >= bound,
                      where + ": gain " + std::to_string(res.report.gain) + " < " + fmt(bound));
            c5.expect(res.report.minDegree == delta, where + ": reported delta differs");
            if (inst.edges.size() <= kDefaultOptBudget) {
                const std::uint64_t opt = naive_opt(inst);
                const long double opt_bound =
                    opt / (96.0L * oracle::window(inst.n) * oracle::log_term(inst.n)) - 0.25L;
                c5.expect(res.report.offline.exact && res.report.offline.opt == opt &&
                              res.report.gain >= opt_bound,
                          where + ": OPT " + std::to_string(opt) + " gain " +
                              std::to_string(res.report.gain));
                ++with_opt;
            }
        } catch (const InvariantViolation& e) {
            const std::string& lemma = e.lemma();
            Criterion& c = lemma.starts_with("Lemma 1 ") ? c4
                           : lemma.starts_with("Lemma 5") ? c2
                           : (lemma.starts_with("Lemma 7") || lemma.starts_with("Lemma 8") ||
                              lemma.starts_with("Lemma 9"))
                               ? c6
                               : c1;
            c.expect(false, where + ": " + e.what());
        } catch (const std::exception& e) {
            c1.expect(false, where + ": " + e.what());
        }
    }
    c1.note = std::to_string(specs.size()) + " instances, " + std::to_string(edges) + " edges";
    c2.note = std::to_string(sampled) + " sampled states";
    c5.note = std::to_string(specs.size()) + " runs, " + std::to_string(with_opt) + " with exact OPT";
    if (specs.size() < 200) c1.fail("corpus has fewer than 200 instances");
    if (sampled < 1000) c2.fail("fewer than 1000 sampled states");
}

// Extra supermartingale samples from RAND runs, which reach states DET avoids.
void rand_states(Criterion& c2, Criterion& c3) {
    std::uint64_t triples = 0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const InstanceSpec inst = gen_uniform(2 + 2 * seed, 150, 1 + seed % 4, seed);
        RunOptions opts;
        opts.policy = PolicyKind::rand;
        opts.seed = seed;
        opts.observer = [&](const EngineState& s, const PotentialView& v, const Edge& e) {
            const std::string at = "rand " + std::to_string(seed) + " step " +
                                   std::to_string(s.step + 1);
            const double ex = exact_expected_phi(s, v, e);
            c2.expect(ex <= v.phi + 1e-9, at + ": E=" + fmt(ex) + " > Phi=" + fmt(v.phi));
            const Phase pS = min_phase(s, e);
            if (pS + s.h() > 12) return;
            for (NodeId i : e) {
                const NodeState& ns = s.node(i);
                const Rational got = check_growth_probability(s, e, i);
                Rational want;
                if (ns.phase < pS + s.h()) {
                    const unsigned __int128 size = std::uint64_t{1} << ns.phase;
                    want = Rational::of(size - ns.gathered_count(ns.phase),
                                        static_cast<unsigned __int128>(s.h()) * size);
                }
                c3.expect(got == want, at + " node " + std::to_string(i) + ": got " +
                                           fmt(got.to_double()) + " want " + fmt(want.to_double()));
                ++triples;
            }
        };
        run_instance(inst, opts);
    }
    c3.note = std::to_string(triples) + " triples";
    if (triples < 100) c3.fail("fewer than 100 triples");
}

void claims(Criterion& c7) {
    // harmonic numbers in long double, one sweep up to 2^24
    std::set<std::uint64_t> needed;
    for (Phase k = 0; k <= 24; ++k) {
        needed.insert(std::uint64_t{1} << k);
        for (std::uint64_t n = 1; n <= 1024; ++n) needed.insert((std::uint64_t{1} << k) - oracle::quota(k, n));
    }
    std::map<std::uint64_t, long double> H{{0, 0.0L}};
    long double acc = 0, comp = 0;
    auto next = needed.begin();
    for (std::uint64_t j = 1; next != needed.end(); ++j) {
        const long double y = 1.0L / j - comp;
        const long double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        while (next != needed.end() && *next <= j) {
            if (*next == j) H[j] = acc;
            ++next;
        }
    }
    for (Phase k = 0; k <= 24; ++k) {
        for (std::uint64_t n = 1; n <= 1024; ++n) {
            const std::uint64_t size = std::uint64_t{1} << k;
            const long double gap = H[size] - H[size - oracle::quota(k, n)];
            const long double bound = oracle::log_term(n);
            const std::string at = "k=" + std::to_string(k) + " n=" + std::to_string(n);
            c7.expect(gap <= bound + 1e-12L, "claim 1 " + at + ": " + fmt(gap) + " > " + fmt(bound));
            c7.expect(std::abs(harmonic_gap(k, n) - gap) <= 1e-10L,
                      "harmonic_gap " + at + ": " + fmt(harmonic_gap(k, n)) + " vs " + fmt(gap));
        }
    }
    std::mt19937_64 gen(20240601);
    std::uniform_real_distribution<long double> unit(0.0L, 1.0L);
    for (int t = 0; t < 10000; ++t) {
        const long double eps = unit(gen);
        const long double alpha = eps + (1 - eps) * unit(gen);
        const long double x = -10 + 20 * unit(gen);
        const long double drop = eps == 0 ? 0 : eps / alpha;
        const long double lhs = alpha * std::exp(x - drop) + (1 - alpha) * std::exp(x);
        const long double rhs = std::exp(x - eps / 2);
        c7.expect(lhs <= rhs + 1e-12L, "claim 2 eps=" + fmt(eps) + " alpha=" + fmt(alpha) +
                                           " x=" + fmt(x) + ": " + fmt(lhs) + " > " + fmt(rhs));
    }
    c7.note = "25x1024 pairs, 10000 triples";
}

void oracle_battery(Criterion& c8) {
    std::mt19937_64 gen(8);
    std::uint64_t battery = 0, planted = 0;
    for (int t = 0; t < 50; ++t) {
        InstanceSpec inst;
        inst.n = 1 + gen() % 5;
        const std::uint64_t m = gen() % 9;
        for (std::uint64_t e = 0; e < m; ++e) {
            const std::uint64_t mask = 1 + gen() % ((std::uint64_t{1} << inst.n) - 1);
            Edge edge;
            for (NodeId v = 1; v <= inst.n; ++v) {
                if (mask >> (v - 1) & 1) edge.push_back(v);
            }
            inst.edges.push_back(edge);
        }
        const OfflineResult got = exact_opt(inst, 8);
        const std::uint64_t want = oracle::brute_opt(inst);
        c8.expect(got.exact && got.opt == want, serialize_instance(inst) + ": exact_opt " +
                                                    std::to_string(got.opt) + " brute " +
                                                    std::to_string(want));
        ++battery;
    }
    for (std::uint64_t n = 1; n <= 6; ++n) {
        for (std::uint64_t covers = 1; covers <= 6; ++covers) {
            for (std::uint64_t seed = 1; seed <= 4; ++seed) {
                const InstanceSpec inst = gen_planted(n, covers, seed);
                if (inst.edges.size() > 14) continue;
                const OfflineResult got = exact_opt(inst, 14);
                c8.expect(got.exact && got.opt >= covers,
                          "planted n=" + std::to_string(n) + " covers=" + std::to_string(covers) +
                              " seed=" + std::to_string(seed) + ": opt " + std::to_string(got.opt));
                ++planted;
            }
        }
    }
    c8.note = std::to_string(battery) + " random, " + std::to_string(planted) + " planted";
}

void coupon(Criterion& c9) {
    std::mt19937_64 gen(99);
    const int trials = 10000;
    std::string note;
    for (auto [k, m] : std::vector<std::pair<Phase, std::uint64_t>>{{4, 10}, {6, 50}, {8, 200}}) {
        std::uniform_int_distribution<std::uint64_t> draw(0, (std::uint64_t{1} << k) - 1);
        long double sum = 0, sum2 = 0;
        for (int t = 0; t < trials; ++t) {
            std::vector<bool> seen(std::size_t{1} << k, false);
            std::uint64_t distinct = 0, draws = 0;
            while (distinct < m) {
                ++draws;
                const auto c = draw(gen);
                if (!seen[c]) {
                    seen[c] = true;
                    ++distinct;
                }
            }
            sum += draws;
            sum2 += static_cast<long double>(draws) * draws;
        }
        const long double mean = sum / trials;
        const long double se = std::sqrt((sum2 / trials - mean * mean) / (trials - 1));
        const std::uint32_t h = 3;
        const long double want = d_k(k, m, h) / h;
        c9.expect(std::abs(mean - want) <= 3 * se,
                  "k=" + std::to_string(k) + " m=" + std::to_string(m) + ": mean " + fmt(mean) +
                      " d/h " + fmt(want) + " se " + fmt(se));
        note += (note.empty() ? "" : ", ") + std::string("(") + std::to_string(k) + "," +
                std::to_string(m) + ") z=" +
                std::to_string(static_cast<double>((mean - want) / se));
    }
    c9.note = note;
}

void determinism(Criterion& c10) {
    std::uint64_t runs = 0;
    const auto specs = acceptance_corpus();
    for (std::size_t i = 0; i < specs.size(); i += 7) {
        const InstanceSpec inst = generate(specs[i]);
        if (inst.edges.size() > 3000) continue;
        const std::string where = describe(specs[i]);
        for (PolicyKind policy : {PolicyKind::det, PolicyKind::rand}) {
            auto record = [&](RunOptions opts, std::string& trace) {
                std::ostringstream out;
                opts.trace = &out;
                RunResult r = run_instance(inst, opts);
                trace = out.str();
                return r;
            };
            RunOptions opts;
            opts.policy = policy;
            opts.seed = 7;
            std::string t1, t2, t3;
            const RunResult a = record(opts, t1);
            const RunResult b = record(opts, t2);
            const std::string ra = report_to_json(a.report).dump();
            c10.expect(t1 == t2 && ra == report_to_json(b.report).dump(),
                       where + " " + to_string(policy) + ": two runs differ");

            RunOptions again;
            again.policy = PolicyKind::replay;
            std::istringstream in(t1);
            again.replay = read_trace(in);
            again.replayMeta =
                meta_from_json(nlohmann::json::parse(meta_to_json(make_trace_meta(a)).dump()));
            try {
                const RunResult c = record(again, t3);
                c10.expect(report_to_json(c.report).dump() == ra && t3 == t1,
                           where + " " + to_string(policy) + ": replay report differs");
            } catch (const std::exception& e) {
                c10.expect(false, where + " " + to_string(policy) + ": " + e.what());
            }
            ++runs;
        }
    }
    c10.note = std::to_string(runs) + " instance/policy pairs";
}

}  // namespace

int main() {
    std::vector<Criterion> c(11);
    const char* names[] = {"",
                           "potential invariant",
                           "supermartingale",
                           "growth probability",
                           "gain bound",
                           "competitive bound",
                           "counter bounds",
                           "appendix claims",
                           "oracle soundness",
                           "coupon collector",
                           "determinism"};
    for (int i = 1; i <= 10; ++i) {
        c[i].id = i;
        c[i].name = names[i];
    }
    const auto start = std::chrono::steady_clock::now();
    corpus(c[1], c[2], c[4], c[5], c[6]);
    const double corpus_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c[1].note += ", " + std::to_string(static_cast<int>(corpus_s)) + " s";
    rand_states(c[2], c[3]);
    claims(c[7]);
    oracle_battery(c[8]);
    coupon(c[9]);
    determinism(c[10]);

    bool all = true;
    for (int i = 1; i <= 10; ++i) {
        const Criterion& k = c[i];
        std::cout << (k.ok ? "PASS" : "FAIL") << " " << k.id << " " << k.name << ": "
                  << k.checked << " checks";
        if (!k.note.empty()) std::cout << "; " << k.note;
        if (!k.ok) std::cout << "; " << k.failures << " failures, first: " << k.first;
        std::cout << "\n";
        all = all && k.ok;
    }
    return all ? 0 : 1;
}
