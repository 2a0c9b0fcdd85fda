#include "dsc/trace.hpp"

#include <istream>

namespace dsc {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_trace_line(const TraceEntry& entry) {
    ordered_json j;
    j["step"] = entry.step;
    j["edge"] = entry.edge;
    j["pS"] = entry.pS;
    j["kstar"] = entry.kstar;
    j["color"] = entry.color;
    j["phiAfter"] = entry.phiAfter;
    return j.dump();
}

TraceEntry parse_trace_line(std::string_view line) {
    try {
        const json j = json::parse(line);
        TraceEntry e;
        e.step = j.at("step").get<std::uint64_t>();
        e.edge = j.at("edge").get<Edge>();
        e.pS = j.at("pS").get<Phase>();
        e.kstar = j.at("kstar").get<Phase>();
        e.color = j.at("color").get<Color>();
        e.phiAfter = j.at("phiAfter").get<double>();
        return e;
    } catch (const json::exception& ex) {
        throw InputError(std::string("malformed trace line: ") + ex.what());
    }
}

std::vector<TraceEntry> read_trace(std::istream& in) {
    std::vector<TraceEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        out.push_back(parse_trace_line(line));
    }
    return out;
}

std::string sidecar_path(const std::string& trace_path) {
    return trace_path + ".meta.json";
}

ordered_json meta_to_json(const TraceMeta& meta) {
    ordered_json j;
    j["policy"] = meta.policy;
    j["seed"] = meta.seed;
    j["rng"] = meta.rng;
    j["instanceDigest"] = meta.instanceDigest;
    j["steps"] = meta.steps;
    j["checkpoint"] = meta.checkpoint;
    return j;
}

TraceMeta meta_from_json(const json& doc) {
    try {
        TraceMeta m;
        m.policy = doc.at("policy").get<std::string>();
        m.seed = doc.at("seed").get<std::uint64_t>();
        m.rng = doc.value("rng", "");
        m.instanceDigest = doc.value("instanceDigest", "");
        m.steps = doc.value("steps", std::uint64_t{0});
        if (doc.contains("checkpoint")) {
            m.checkpoint = ordered_json::parse(doc.at("checkpoint").dump());
        }
        return m;
    } catch (const json::exception& ex) {
        throw InputError(std::string("malformed trace metadata: ") + ex.what());
    }
}

namespace {

template <typename Map>
ordered_json counters_to_json(const Map& m) {
    ordered_json out = ordered_json::array();
    for (const auto& [k, v] : m) {
        out.push_back({k, v});
    }
    return out;
}

}  // namespace

ordered_json state_to_json(const EngineState& state) {
    ordered_json j;
    j["n"] = state.n();
    j["h"] = state.h();
    j["step"] = state.step;
    ordered_json nodes = ordered_json::array();
    for (const NodeState& ns : state.nodes) {
        ordered_json node;
        node["phase"] = ns.phase;
        node["degree"] = ns.degree;
        ordered_json gathered = ordered_json::array();
        for (const auto& [k, set] : ns.gathered) {
            gathered.push_back({k, set.values()});
        }
        node["gathered"] = std::move(gathered);
        node["w"] = counters_to_json(ns.w);
        node["s"] = counters_to_json(ns.s);
        nodes.push_back(std::move(node));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

EngineState state_from_json(const json& doc) {
    try {
        EngineState state = init_state(doc.at("n").get<std::uint64_t>());
        if (doc.at("h").get<std::uint32_t>() != state.h()) {
            throw InputError("checkpoint h does not match its node count");
        }
        state.step = doc.at("step").get<std::uint64_t>();
        const auto& nodes = doc.at("nodes");
        if (nodes.size() != state.n()) {
            throw InputError("checkpoint has the wrong number of nodes");
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto& jn = nodes[i];
            NodeState& ns = state.nodes[i];
            ns.phase = jn.at("phase").get<Phase>();
            ns.degree = jn.at("degree").get<std::uint64_t>();
            for (const auto& entry : jn.at("gathered")) {
                const auto k = entry.at(0).get<Phase>();
                const PaletteRange range = palette_range(k);
                ColorSet& set = ns.gathered[k];
                for (const auto& c : entry.at(1)) {
                    const auto color = c.get<Color>();
                    if (!range.contains(color)) {
                        throw InputError("checkpoint color outside its palette");
                    }
                    if (set.insert(color)) {
                        state.gatherers[color].push_back(static_cast<NodeId>(i + 1));
                    }
                }
            }
            for (const auto& entry : jn.at("w")) {
                ns.w[entry.at(0).get<Phase>()] = entry.at(1).get<std::uint64_t>();
            }
            for (const auto& entry : jn.at("s")) {
                ns.s[entry.at(0).get<Phase>()] = entry.at(1).get<std::uint64_t>();
            }
        }
        for (const auto& [color, holders] : state.gatherers) {
            if (holders.size() == state.n()) {
                ++state.fully_used;
            }
        }
        return state;
    } catch (const json::exception& ex) {
        throw InputError(std::string("malformed checkpoint: ") + ex.what());
    }
}

}  // namespace dsc
