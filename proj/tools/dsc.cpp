#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "dsc/harness.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitViolation = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw dsc::InputError("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw dsc::InputError("cannot write " + path);
    }
}

struct RunArgs {
    std::string policy = "det";
    std::uint64_t seed = 0;
    std::string instance;
    std::string gen;
    bool check = false;
    std::string trace;
    std::string report;
    bool exhaustive = false;
    bool timing = false;
    std::size_t optBudget = dsc::kDefaultOptBudget;
};

dsc::InstanceSpec load_instance(const std::string& path, const std::string& gen,
                                std::uint64_t seed) {
    if (path.empty() == gen.empty()) {
        throw dsc::InputError("give exactly one of --instance and --gen");
    }
    if (!path.empty()) {
        return dsc::parse_instance(read_file(path));
    }
    return dsc::generate(dsc::parse_generator_spec(gen, seed));
}

int cmd_run(const RunArgs& args) {
    const dsc::InstanceSpec instance = load_instance(args.instance, args.gen, args.seed);
    dsc::RunOptions options;
    options.policy = dsc::parse_policy(args.policy);
    options.seed = args.seed;
    options.check = args.check;
    options.exhaustive = args.exhaustive;
    options.timing = args.timing;
    options.optBudget = args.optBudget;

    std::ofstream trace_out;
    if (options.policy == dsc::PolicyKind::replay) {
        if (args.trace.empty()) {
            throw dsc::InputError("--policy replay needs --trace <recorded trace>");
        }
        std::istringstream in(read_file(args.trace));
        options.replay = dsc::read_trace(in);
        std::ifstream meta(dsc::sidecar_path(args.trace));
        if (meta) {
            try {
                options.replayMeta = dsc::meta_from_json(nlohmann::json::parse(meta));
            } catch (const nlohmann::json::exception& e) {
                throw dsc::InputError(std::string("malformed trace metadata: ") + e.what());
            }
        }
    } else if (!args.trace.empty()) {
        trace_out.open(args.trace, std::ios::binary);
        if (!trace_out) {
            throw dsc::InputError("cannot write " + args.trace);
        }
        options.trace = &trace_out;
    }

    const dsc::RunResult result = dsc::run_instance(instance, options);
    if (trace_out.is_open()) {
        trace_out.close();
        write_text(dsc::sidecar_path(args.trace),
                   dsc::meta_to_json(dsc::make_trace_meta(result)).dump(2) + "\n");
    }
    write_text(args.report, dsc::report_to_json(result.report).dump(2) + "\n");
    return 0;
}

int cmd_verify(const std::vector<std::string>& suites, const dsc::VerifyOptions& options,
               const std::string& report) {
    std::vector<std::string> names = suites;
    if (names.empty() || (names.size() == 1 && names[0] == "all")) {
        names = dsc::suite_names();
    }
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    bool ok = true;
    for (const std::string& name : names) {
        const dsc::SuiteResult r = dsc::run_suite(name, options);
        std::cerr << (r.passed ? "PASS " : "FAIL ") << name << " (" << r.checked << " checks)\n";
        for (const std::string& f : r.failures) {
            std::cerr << "  " << f << "\n";
        }
        ok = ok && r.passed;
        out.push_back(dsc::suite_to_json(r));
    }
    write_text(report, (names.size() == 1 ? out[0] : out).dump(2) + "\n");
    return ok ? 0 : kExitViolation;
}

struct SweepArgs {
    std::string kind = "planted";
    std::string ns = "8,16,32";
    std::string sizes = "16,64,256";
    std::uint64_t edgeSize = 0;
    std::string policies = "det,rand,greedy";
    std::string seeds = "1";
    std::uint64_t instanceSeed = 1;
    unsigned jobs = 1;
    std::string out;
};

int cmd_sweep(const SweepArgs& args) {
    dsc::SweepGrid grid;
    grid.kind = dsc::parse_generator_kind(args.kind);
    grid.ns = dsc::parse_u64_list(args.ns);
    grid.sizes = dsc::parse_u64_list(args.sizes);
    grid.edgeSize = args.edgeSize;
    std::stringstream list(args.policies);
    for (std::string p; std::getline(list, p, ',');) {
        const dsc::PolicyKind kind = dsc::parse_policy(p);
        if (kind == dsc::PolicyKind::replay) {
            throw dsc::InputError("sweep cannot use the replay policy");
        }
        grid.policies.push_back(kind);
    }
    grid.seeds = dsc::parse_u64_list(args.seeds);
    grid.instanceSeed = args.instanceSeed;
    grid.jobs = args.jobs;

    std::string csv = dsc::sweep_csv_header() + "\n";
    for (const dsc::SweepRow& row : dsc::run_sweep(grid)) {
        csv += dsc::to_csv(row) + "\n";
    }
    write_text(args.out, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disjoint set cover: online coloring experiments"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "stream an instance through a policy");
    run_cmd->add_option("--policy", run.policy, "det, rand, greedy or replay")
        ->check(CLI::IsMember({"det", "rand", "greedy", "replay"}));
    run_cmd->add_option("--seed", run.seed, "policy seed; also the generator seed for --gen");
    auto* inst_opt = run_cmd->add_option("--instance", run.instance, "instance JSON file");
    auto* gen_opt = run_cmd->add_option("--gen", run.gen, "generator spec, e.g. planted:n=8,covers=32");
    inst_opt->excludes(gen_opt);
    run_cmd->add_flag("--check", run.check, "assert per-step invariants");
    run_cmd->add_option("--trace", run.trace, "trace output (input for --policy replay)");
    run_cmd->add_option("--report", run.report, "report output; stdout by default");
    run_cmd->add_flag("--exhaustive", run.exhaustive, "DET scans every color");
    run_cmd->add_flag("--timing", run.timing, "record wall time in the report");
    run_cmd->add_option("--opt-budget", run.optBudget, "largest edge count for exact OPT");

    std::vector<std::string> suites;
    dsc::VerifyOptions verify;
    verify.jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string verify_report;
    auto* verify_cmd = app.add_subcommand("verify", "run property suites");
    verify_cmd->add_option("suite", suites, "suite names, or all")
        ->check(CLI::IsMember([] {
            auto names = dsc::suite_names();
            names.push_back("all");
            return names;
        }()));
    verify_cmd->add_option("--seed", verify.seed, "seed for sampled inputs");
    verify_cmd->add_option("--jobs", verify.jobs, "concurrent corpus runs");
    verify_cmd->add_option("--report", verify_report, "JSON output; stdout by default");

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "grid of runs as CSV");
    sweep_cmd->add_option("--kind", sweep.kind, "planted, uniform, full or starved");
    sweep_cmd->add_option("--n", sweep.ns, "node counts, e.g. 8,16,32");
    sweep_cmd->add_option("--sizes", sweep.sizes, "cover counts (planted) or edge counts");
    sweep_cmd->add_option("--edge-size", sweep.edgeSize, "uniform edge size (default ceil(n/2))");
    sweep_cmd->add_option("--policies", sweep.policies, "comma list of det, rand, greedy");
    sweep_cmd->add_option("--seeds", sweep.seeds, "policy seeds, e.g. 1..50");
    sweep_cmd->add_option("--instance-seed", sweep.instanceSeed, "generator seed");
    sweep_cmd->add_option("--jobs", sweep.jobs, "concurrent runs");
    sweep_cmd->add_option("--out", sweep.out, "CSV output; stdout by default");

    std::string gen_spec;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen", "write a generated instance as JSON");
    gen_cmd->add_option("spec", gen_spec, "generator spec")->required();
    gen_cmd->add_option("--seed", gen_seed, "generator seed");
    gen_cmd->add_option("--out", gen_out, "output file; stdout by default");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (run_cmd->parsed()) {
            return cmd_run(run);
        }
        if (verify_cmd->parsed()) {
            return cmd_verify(suites, verify, verify_report);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sweep);
        }
        if (gen_cmd->parsed()) {
            const auto instance = dsc::generate(dsc::parse_generator_spec(gen_spec, gen_seed));
            write_text(gen_out, dsc::serialize_instance(instance) + "\n");
            return 0;
        }
    } catch (const dsc::InvariantViolation& e) {
        std::cerr << "invariant violation at step " << e.step() << " (" << e.lemma()
                  << "): " << e.what() << "\n";
        return kExitViolation;
    } catch (const dsc::ReplayError& e) {
        std::cerr << e.what() << "\n";
        return kExitViolation;
    } catch (const dsc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return 0;
}
