#include "dsc/run.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

namespace dsc {

PolicyKind parse_policy(std::string_view name) {
    if (name == "det") return PolicyKind::det;
    if (name == "rand") return PolicyKind::rand;
    if (name == "greedy") return PolicyKind::greedy;
    if (name == "replay") return PolicyKind::replay;
    throw InputError("unknown policy: " + std::string(name));
}

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::det: return "det";
        case PolicyKind::rand: return "rand";
        case PolicyKind::greedy: return "greedy";
        case PolicyKind::replay: return "replay";
    }
    return "unknown";
}

namespace {

constexpr const char* kPass = "pass";
constexpr const char* kNotRun = "not-run";

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Runtime assertions of the per-step and end-of-run properties.
class StepChecker {
public:
    StepChecker(const EngineState& state, DCache& cache)
        : n_(state.n()),
          h_(state.h()),
          log_term_(log_four_e_n(state.n())),
          cache_(cache) {}

    void after_step(const EngineState& state, const PotentialView& view,
                    const StepChange& change, double phi_prev, double expected,
                    std::optional<double> det_phi) {
        const std::uint64_t t = state.step;
        for (const NodeChange& nc : change.nodes) {
            if (nc.w_incremented) {
                if (w_by_phase_.size() <= nc.phase_before) {
                    w_by_phase_.resize(nc.phase_before + 1, 0);
                }
                ++w_by_phase_[nc.phase_before];
            }
        }

        for (const NodeChange& nc : change.nodes) {
            const NodeState& ns = state.nodes[nc.node - 1];
            check_node_identity(t, nc.node, ns);
            check_cascade(t, nc.node, ns);
            // the bound is asserted where the cascade caps c below q_k; colors kept
            // arriving in a completed phase can push d_k past it, which is tallied
            const double at_phase = cache_.value(ns.phase, ns.gathered_count(ns.phase));
            if (!leq_with_slack(at_phase, d_bound(ns.phase))) {
                throw InvariantViolation(t, "Lemma 6 (d_k bound)",
                                         "node " + std::to_string(nc.node) + " k=" +
                                             std::to_string(ns.phase) + " d=" + fmt(at_phase) +
                                             " > " + fmt(d_bound(ns.phase)));
            }
            if (change.kstar != ns.phase &&
                !leq_with_slack(cache_.value(change.kstar, ns.gathered_count(change.kstar)),
                                d_bound(change.kstar))) {
                ++off_phase_exceedances_;
            }
            check_charging(t, nc.node, ns);
        }

        const std::int64_t mcp = min_completed_phase(state);
        if (mcp >= 1) {
            const std::uint64_t need = std::uint64_t{1} << (mcp - 1);
            if (fully_used_count(state) < need) {
                throw InvariantViolation(t, "Lemma 1 (gain bound)",
                                         "all nodes completed phase " + std::to_string(mcp) +
                                             " but only " + std::to_string(fully_used_count(state)) +
                                             " colors are fully used");
            }
        }

        if (!(expected <= phi_prev + 1e-9)) {
            throw InvariantViolation(t, "Lemma 5 (supermartingale)",
                                     "E[Phi^t] = " + fmt(expected) + " > Phi^{t-1} = " +
                                         fmt(phi_prev));
        }
        if (det_phi && !leq_with_slack(*det_phi, expected)) {
            throw InvariantViolation(t, "DET dominance",
                                     "chosen Phi " + fmt(*det_phi) + " > E[Phi^t] " +
                                         fmt(expected));
        }

        const PotentialView scratch = recompute_phi(state, cache_);
        if (std::abs(view.phi - scratch.phi) > 1e-9 * scratch.phi) {
            throw InvariantViolation(t, "incremental/scratch Phi agreement",
                                     "incremental " + fmt(view.phi) + " vs scratch " +
                                         fmt(scratch.phi));
        }
        if (scratch.phi <= static_cast<double>(n_) * (1.0 + 1e-9)) {
            const double ln_n = std::log(static_cast<double>(n_));
            for (std::size_t i = 0; i < scratch.z.size(); ++i) {
                if (!leq_with_slack(scratch.z[i], ln_n)) {
                    throw InvariantViolation(t, "per-node potential bound (Z_i <= ln n)",
                                             "node " + std::to_string(i + 1) + " Z=" +
                                                 fmt(scratch.z[i]));
                }
            }
        }
    }

    /// Full-state checks, plus the counter bounds when Phi <= n held throughout.
    void at_end(const EngineState& state, bool potential_held) {
        const std::uint64_t t = state.step;
        for (std::size_t i = 0; i < state.nodes.size(); ++i) {
            const NodeState& ns = state.nodes[i];
            const auto id = static_cast<NodeId>(i + 1);
            check_node_identity(t, id, ns);
            check_cascade(t, id, ns);
            for (const auto& [k, set] : ns.gathered) {
                const PaletteRange range = palette_range(k);
                for (Color c : set) {
                    if (!range.contains(c)) {
                        throw InvariantViolation(t, "palette membership",
                                                 "node " + std::to_string(id) + " holds color " +
                                                     std::to_string(c) + " under phase " +
                                                     std::to_string(k));
                    }
                }
            }
        }
        if (!potential_held) {
            return;
        }
        for (std::size_t i = 0; i < state.nodes.size(); ++i) {
            const NodeState& ns = state.nodes[i];
            Phase top = 0;
            if (!ns.w.empty()) top = std::max(top, ns.w.rbegin()->first);
            if (!ns.s.empty()) top = std::max(top, ns.s.rbegin()->first);
            std::uint64_t w_sum = 0;
            std::uint64_t s_sum = 0;
            for (Phase l = 0; l <= top; ++l) {
                w_sum += ns.w_at(l);
                s_sum += ns.s_at(l);
                const double scale = h_ * log_term_ * std::ldexp(1.0, static_cast<int>(l));
                if (!leq_with_slack(static_cast<double>(w_sum), 8.0 * scale)) {
                    throw InvariantViolation(t, "Lemma 7 (w counter bound)",
                                             "node " + std::to_string(i + 1) + " l=" +
                                                 std::to_string(l) + " sum w=" +
                                                 std::to_string(w_sum) + " > " + fmt(8.0 * scale));
                }
                if (!leq_with_slack(static_cast<double>(s_sum), 16.0 * scale)) {
                    throw InvariantViolation(t, "Lemma 9 (s counter bound)",
                                             "node " + std::to_string(i + 1) + " l=" +
                                                 std::to_string(l) + " sum s=" +
                                                 std::to_string(s_sum) + " > " +
                                                 fmt(16.0 * scale));
                }
            }
        }
    }

    [[nodiscard]] std::uint64_t off_phase_exceedances() const noexcept {
        return off_phase_exceedances_;
    }

private:
    [[nodiscard]] double d_bound(Phase k) const {
        return h_ * log_term_ * std::ldexp(1.0, static_cast<int>(k));
    }

    void check_node_identity(std::uint64_t t, NodeId id, const NodeState& ns) const {
        std::uint64_t total = 0;
        for (const auto& [k, v] : ns.w) total += v;
        for (const auto& [k, v] : ns.s) total += v;
        if (total != ns.degree) {
            throw InvariantViolation(t, "degree identity (sum w + s = deg)",
                                     "node " + std::to_string(id) + " sum " +
                                         std::to_string(total) + " != degree " +
                                         std::to_string(ns.degree));
        }
    }

    void check_cascade(std::uint64_t t, NodeId id, const NodeState& ns) const {
        if (ns.gathered_count(ns.phase) >= quota(ns.phase, n_)) {
            throw InvariantViolation(t, "cascade invariant (|C_{i,p(i)}| < q_{p(i)})",
                                     "node " + std::to_string(id) + " phase " +
                                         std::to_string(ns.phase));
        }
    }

    // s_{i,l} <= sum_j sum_{r <= l-h} w_{j,r}
    void check_charging(std::uint64_t t, NodeId id, const NodeState& ns) const {
        for (const auto& [l, s] : ns.s) {
            std::uint64_t rhs = 0;
            if (l >= h_) {
                for (Phase r = 0; r <= l - h_ && r < w_by_phase_.size(); ++r) {
                    rhs += w_by_phase_[r];
                }
            }
            if (s > rhs) {
                throw InvariantViolation(t, "Lemma 8 (charging)",
                                         "node " + std::to_string(id) + " s_{" +
                                             std::to_string(l) + "}=" + std::to_string(s) +
                                             " > " + std::to_string(rhs));
            }
        }
    }

    std::uint64_t n_;
    std::uint32_t h_;
    double log_term_;
    DCache& cache_;
    std::vector<std::uint64_t> w_by_phase_;
    std::uint64_t off_phase_exceedances_ = 0;
};

const std::vector<std::string>& engine_check_names() {
    static const std::vector<std::string> names = {
        "cascade_invariant",    "degree_identity",          "det_dominance",
        "lemma1_gain_bound",    "lemma5_supermartingale",   "lemma6_d_bound",
        "lemma7_w_bound",       "lemma8_charging",          "lemma9_s_bound",
        "node_potential_bound", "phi_consistency",          "potential_invariant",
        "gain_le_delta",        "gain_le_opt",              "theorem1_competitive",
    };
    return names;
}

void finish_offline(RunReport& report, const InstanceSpec& instance, const RunOptions& options) {
    report.offline = exact_opt(instance, options.optBudget);
    report.verdict = competitive_check(report.gain, report.minDegree, report.offline, instance.n);
    if (!options.check) {
        return;
    }
    const std::uint64_t t = instance.edges.size();
    if (report.gain > report.minDegree) {
        throw InvariantViolation(t, "gain <= delta(E)",
                                 std::to_string(report.gain) + " > " +
                                     std::to_string(report.minDegree));
    }
    report.checks["gain_le_delta"] = kPass;
    if (report.offline.exact) {
        if (report.gain > report.offline.opt) {
            throw InvariantViolation(t, "gain <= OPT",
                                     std::to_string(report.gain) + " > " +
                                         std::to_string(report.offline.opt));
        }
        report.checks["gain_le_opt"] = kPass;
    } else {
        report.checks["gain_le_opt"] = "skipped: OPT not computed";
    }
}

}  // namespace

RunResult run_instance(const InstanceSpec& instance, const RunOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    validate_instance(instance);

    RunResult result;
    RunReport& report = result.report;
    report.instanceDigest = instance_digest(instance);
    report.policy = to_string(options.policy);
    report.seed = options.seed;
    report.n = instance.n;
    report.edges = instance.edges.size();
    if (options.policy == PolicyKind::rand) {
        report.rng = std::string(Rng::kName);
    }
    const bool det_replay = options.policy == PolicyKind::replay && options.replayMeta &&
                            options.replayMeta->policy == "det";
    if (options.policy == PolicyKind::replay && options.replayMeta) {
        report.policy = options.replayMeta->policy;
        report.seed = options.replayMeta->seed;
        report.rng = options.replayMeta->rng;
    }
    const bool det_like = options.policy == PolicyKind::det || det_replay;

    if (options.policy == PolicyKind::greedy) {
        GreedyAux aux = GreedyAux::for_nodes(instance.n);
        GatherCounter counter(instance.n);
        for (const Edge& edge : instance.edges) {
            counter.record(edge, greedy_policy(aux, edge));
        }
        report.gain = counter.fully_used();
        report.minDegree = counter.min_degree();
        report.checks["gain_le_delta"] = kNotRun;
        report.checks["gain_le_opt"] = kNotRun;
        finish_offline(report, instance, options);
    } else {
        EngineState state = init_state(instance.n);
        DCache cache(state.h());
        PotentialView view = recompute_phi(state, cache);
        StepChecker checker(state, cache);
        Rng rng(options.seed);
        std::optional<ReplayPolicy> replay;
        if (options.policy == PolicyKind::replay) {
            replay.emplace(options.replay);
        }
        const double n = static_cast<double>(instance.n);
        double max_phi = view.phi;
        bool potential_held = view.phi <= n * (1.0 + 1e-9);
        std::optional<double> min_margin;

        for (const Edge& edge : instance.edges) {
            if (options.observer) {
                options.observer(state, view, edge);
            }
            const double phi_prev = view.phi;
            const double expected =
                options.check ? exact_expected_phi(state, view, edge) : 0.0;

            Decision d;
            switch (options.policy) {
                case PolicyKind::det:
                    d = det_policy(state, view, edge, {options.exhaustive});
                    break;
                case PolicyKind::rand:
                    d = rand_policy(state, edge, rng);
                    break;
                case PolicyKind::replay: {
                    d = replay->decide(state, edge);
                    if (det_replay) {
                        const Decision again = det_policy(state, view, edge, {options.exhaustive});
                        if (again.kstar != d.kstar || again.color != d.color) {
                            throw ReplayError(state.step + 1,
                                              "recorded candidate differs from the DET choice");
                        }
                        d.nearTie = again.nearTie;
                    }
                    break;
                }
                case PolicyKind::greedy:
                    break;
            }
            if (d.nearTie) {
                ++report.nearTies;
            }

            const StepChange change = apply_color(state, edge, d.kstar, d.color);
            view.apply(state, change);
            if (state.step % kResyncInterval == 0) {
                view.resync(state, cache);
            }
            const double phi = view.phi;
            max_phi = std::max(max_phi, phi);
            if (det_like) {
                const double margin = phi_prev - phi;
                min_margin = min_margin ? std::min(*min_margin, margin) : margin;
            }
            if (phi > n * (1.0 + 1e-9)) {
                potential_held = false;
                if (det_like) {
                    throw InvariantViolation(state.step, "potential invariant (Phi <= n)",
                                             "Phi = " + fmt(phi));
                }
            }
            if (options.check) {
                checker.after_step(state, view, change, phi_prev, expected,
                                   det_like ? std::optional<double>(phi) : std::nullopt);
            }
            if (replay) {
                replay->confirm(state.step, phi);
            }
            if (options.trace != nullptr) {
                TraceEntry entry{state.step, edge, change.pS, d.kstar, d.color, phi};
                *options.trace << format_trace_line(entry) << '\n';
            }
        }
        if (replay && !replay->exhausted()) {
            throw ReplayError(state.step + 1, "trace has " + std::to_string(replay->size()) +
                                                  " entries but the instance only " +
                                                  std::to_string(state.step));
        }

        report.gain = fully_used_count(state);
        report.minDegree = min_degree(state);
        report.minCompletedPhase = min_completed_phase(state);
        report.maxPhi = max_phi;
        report.finalPhi = view.phi;
        report.minMargin = min_margin;
        report.potentialInvariantHeld = potential_held;

        for (const auto& name : engine_check_names()) {
            report.checks[name] = kNotRun;
        }
        if (options.check) {
            checker.at_end(state, potential_held);
            for (const char* name :
                 {"cascade_invariant", "degree_identity", "lemma1_gain_bound",
                  "lemma5_supermartingale", "lemma8_charging",
                  "node_potential_bound", "phi_consistency"}) {
                report.checks[name] = kPass;
            }
            const std::uint64_t off = checker.off_phase_exceedances();
            report.checks["lemma6_d_bound"] =
                off == 0 ? std::string(kPass)
                         : "pass at current phases; exceeded " + std::to_string(off) +
                               " times in other phases";
            const char* te = potential_held ? kPass : "skipped: Phi exceeded n";
            report.checks["lemma7_w_bound"] = te;
            report.checks["lemma9_s_bound"] = te;
            report.checks["potential_invariant"] = potential_held ? kPass : "fails (RAND run)";
            report.checks["det_dominance"] = det_like ? kPass : "skipped: not DET";
        }
        finish_offline(report, instance, options);
        if (options.check) {
            if (det_like) {
                const std::uint64_t t = state.step;
                if (!report.verdict.holds) {
                    throw InvariantViolation(t, "Theorem 1 (delta form)",
                                             "gain " + std::to_string(report.gain) + " < " +
                                                 fmt(report.verdict.deltaBound));
                }
                if (report.verdict.optHolds && !*report.verdict.optHolds) {
                    throw InvariantViolation(t, "Theorem 1 (OPT form)",
                                             "gain " + std::to_string(report.gain) + " < " +
                                                 fmt(*report.verdict.optBound));
                }
                report.checks["theorem1_competitive"] = kPass;
            } else {
                report.checks["theorem1_competitive"] = "skipped: not DET";
            }
        }
        result.finalState = std::move(state);
    }

    if (options.timing) {
        report.wallTimeMs = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - started)
                                .count();
    }
    return result;
}

namespace {

template <typename T>
nlohmann::ordered_json opt_json(const std::optional<T>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json report_to_json(const RunReport& r) {
    nlohmann::ordered_json j;
    j["instanceDigest"] = r.instanceDigest;
    j["policy"] = r.policy;
    j["seed"] = r.seed;
    j["rng"] = r.rng;
    j["n"] = r.n;
    j["edges"] = r.edges;
    j["gain"] = r.gain;
    j["minDegree"] = r.minDegree;
    j["minCompletedPhase"] = opt_json(r.minCompletedPhase);
    j["maxPhi"] = opt_json(r.maxPhi);
    j["finalPhi"] = opt_json(r.finalPhi);
    j["minMargin"] = opt_json(r.minMargin);
    j["nearTies"] = r.nearTies;
    j["potentialInvariantHeld"] = opt_json(r.potentialInvariantHeld);

    nlohmann::ordered_json v;
    v["r"] = r.verdict.r;
    v["deltaBound"] = r.verdict.deltaBound;
    v["holds"] = r.verdict.holds;
    v["deltaRatio"] = opt_json(r.verdict.deltaRatio);
    v["optBound"] = opt_json(r.verdict.optBound);
    v["optHolds"] = opt_json(r.verdict.optHolds);
    v["optRatio"] = opt_json(r.verdict.optRatio);
    j["competitiveVerdict"] = std::move(v);

    nlohmann::ordered_json off;
    off["opt"] = r.offline.opt;
    off["exact"] = r.offline.exact;
    off["minDegree"] = r.offline.minDegree;
    off["witness"] = r.offline.exact ? nlohmann::ordered_json(r.offline.witness)
                                     : nlohmann::ordered_json(nullptr);
    j["offline"] = std::move(off);

    nlohmann::ordered_json checks = nlohmann::ordered_json::object();
    for (const auto& [name, outcome] : r.checks) {
        checks[name] = outcome;
    }
    j["checks"] = std::move(checks);
    if (r.wallTimeMs) {
        j["wallTimeMs"] = *r.wallTimeMs;
    }
    return j;
}

TraceMeta make_trace_meta(const RunResult& result) {
    TraceMeta meta;
    meta.policy = result.report.policy;
    meta.seed = result.report.seed;
    meta.rng = result.report.rng;
    meta.instanceDigest = result.report.instanceDigest;
    meta.steps = result.report.edges;
    if (result.finalState) {
        meta.checkpoint = state_to_json(*result.finalState);
    }
    return meta;
}

}  // namespace dsc
