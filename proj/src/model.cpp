#include "dsc/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"

namespace dsc {

PaletteRange palette_range(Phase k) {
    if (k > kMaxPhase) {
        throw OverflowError("palette index " + std::to_string(k) + " overflows the color space");
    }
    const Color lo = Color{1} << k;
    return {lo, (lo << 1) - 1};
}

Phase palette_of(Color c) {
    if (c == 0) {
        throw DomainError("color 0 does not belong to any palette");
    }
    return static_cast<Phase>(std::bit_width(c) - 1);
}

std::uint64_t quota(Phase k, std::uint64_t n) {
    if (n == 0) {
        throw DomainError("quota needs n >= 1");
    }
    if (k > kMaxPhase) {
        throw OverflowError("quota: phase " + std::to_string(k) + " overflows the color space");
    }
    // ceil((2n-1) * 2^k / (2n)) = 2^k - floor(2^k / (2n))
    const unsigned __int128 size = static_cast<unsigned __int128>(1) << k;
    const unsigned __int128 twice_n = static_cast<unsigned __int128>(n) * 2;
    return static_cast<std::uint64_t>(size - size / twice_n);
}

PaletteParams PaletteParams::for_nodes(std::uint64_t n) {
    if (n == 0) {
        throw InputError("node count must be positive");
    }
    // ceil(log2 n) == bit_width(n - 1) for n >= 1
    const auto bits = static_cast<std::uint32_t>(std::bit_width(n - 1));
    return {n, std::max<std::uint32_t>(1, bits)};
}

double log_four_e_n(std::uint64_t n) {
    return std::log(4.0 * static_cast<double>(n)) + 1.0;
}

Edge normalize_edge(std::vector<NodeId> nodes, std::uint64_t n, std::size_t index) {
    if (nodes.empty()) {
        throw InputError("empty hyperedge at index " + std::to_string(index));
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (nodes.front() < 1 || nodes.back() > n) {
        throw InputError("node id out of range in hyperedge at index " + std::to_string(index));
    }
    return nodes;
}

void validate_instance(const InstanceSpec& instance) {
    if (instance.n < 1) {
        throw InputError("node count must be positive");
    }
    for (std::size_t i = 0; i < instance.edges.size(); ++i) {
        const Edge& e = instance.edges[i];
        if (e.empty()) {
            throw InputError("empty hyperedge at index " + std::to_string(i));
        }
        if (!std::is_sorted(e.begin(), e.end()) ||
            std::adjacent_find(e.begin(), e.end()) != e.end()) {
            throw InputError("hyperedge at index " + std::to_string(i) + " is not a sorted set");
        }
        if (e.front() < 1 || e.back() > instance.n) {
            throw InputError("node id out of range in hyperedge at index " + std::to_string(i));
        }
    }
}

InstanceSpec parse_instance(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("instance is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("edges")) {
        throw InputError(R"(instance must be an object with "n" and "edges")");
    }
    const auto& jn = doc.at("n");
    if (!jn.is_number_integer() || jn.get<std::int64_t>() < 1) {
        throw InputError("node count must be a positive integer");
    }
    InstanceSpec out;
    out.n = jn.get<std::uint64_t>();
    if (out.n > std::numeric_limits<NodeId>::max()) {
        throw InputError("node count too large");
    }
    const auto& jedges = doc.at("edges");
    if (!jedges.is_array()) {
        throw InputError(R"("edges" must be an array)");
    }
    out.edges.reserve(jedges.size());
    for (std::size_t i = 0; i < jedges.size(); ++i) {
        const auto& je = jedges[i];
        if (!je.is_array()) {
            throw InputError("hyperedge at index " + std::to_string(i) + " is not an array");
        }
        std::vector<NodeId> nodes;
        nodes.reserve(je.size());
        for (const auto& v : je) {
            if (!v.is_number_integer()) {
                throw InputError("non-integer node id in hyperedge at index " + std::to_string(i));
            }
            const auto id = v.get<std::int64_t>();
            if (id < 1 || static_cast<std::uint64_t>(id) > out.n) {
                throw InputError("node id out of range in hyperedge at index " +
                                 std::to_string(i));
            }
            nodes.push_back(static_cast<NodeId>(id));
        }
        out.edges.push_back(normalize_edge(std::move(nodes), out.n, i));
    }
    return out;
}

std::string serialize_instance(const InstanceSpec& instance) {
    nlohmann::json doc;
    doc["n"] = instance.n;
    doc["edges"] = instance.edges;
    return doc.dump();
}

std::string instance_digest(const InstanceSpec& instance) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_instance(instance)) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::vector<std::uint64_t> degrees(const InstanceSpec& instance) {
    std::vector<std::uint64_t> deg(instance.n, 0);
    for (const Edge& e : instance.edges) {
        for (NodeId v : e) {
            ++deg[v - 1];
        }
    }
    return deg;
}

std::uint64_t min_degree(const InstanceSpec& instance) {
    const auto deg = degrees(instance);
    return *std::min_element(deg.begin(), deg.end());
}

}  // namespace dsc
