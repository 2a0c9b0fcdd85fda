#include "dsc/generators.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>

#include "dsc/policies.hpp"

namespace dsc {

namespace {

constexpr std::uint64_t kPlantedStream = 1;
constexpr std::uint64_t kUniformStream = 2;

std::uint64_t ceil_sqrt(std::uint64_t m) {
    std::uint64_t s = 0;
    while (s * s < m) {
        ++s;
    }
    return s;
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[rng.below(i)]);
    }
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw InputError("generator parameter " + std::string(key) + " is not an integer: " +
                         std::string(value));
    }
    return out;
}

}  // namespace

std::string to_string(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::planted: return "planted";
        case GeneratorKind::uniform: return "uniform";
        case GeneratorKind::full: return "full";
        case GeneratorKind::starved: return "starved";
    }
    return "unknown";
}

std::string describe(const GeneratorSpec& spec) {
    std::string out = to_string(spec.kind) + ":n=" + std::to_string(spec.n);
    out += (spec.kind == GeneratorKind::planted ? ",covers=" : ",m=") + std::to_string(spec.m);
    if (spec.kind == GeneratorKind::uniform) {
        out += ",size=" + std::to_string(spec.edgeSize);
    }
    if (spec.kind == GeneratorKind::planted || spec.kind == GeneratorKind::uniform) {
        out += ",seed=" + std::to_string(spec.seed);
    }
    return out;
}

GeneratorKind parse_generator_kind(std::string_view kind) {
    for (GeneratorKind k : {GeneratorKind::planted, GeneratorKind::uniform, GeneratorKind::full,
                            GeneratorKind::starved}) {
        if (kind == to_string(k)) {
            return k;
        }
    }
    throw InputError("unknown generator kind: " + std::string(kind));
}

GeneratorSpec parse_generator_spec(std::string_view text, std::uint64_t seed) {
    const auto colon = text.find(':');
    const std::string_view kind = text.substr(0, colon);
    GeneratorSpec spec;
    spec.seed = seed;
    spec.kind = parse_generator_kind(kind);

    std::map<std::string, std::uint64_t, std::less<>> params;
    if (colon != std::string_view::npos) {
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = rest.substr(0, comma);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) {
                throw InputError("generator parameter without '=': " + std::string(item));
            }
            const std::string key(item.substr(0, eq));
            params[key] = parse_u64(key, item.substr(eq + 1));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
    }
    auto take = [&](std::initializer_list<std::string_view> names) -> std::uint64_t {
        for (auto name : names) {
            if (auto it = params.find(name); it != params.end()) {
                const std::uint64_t v = it->second;
                params.erase(it);
                return v;
            }
        }
        throw InputError("generator " + std::string(kind) + " needs parameter " +
                         std::string(*names.begin()));
    };

    spec.n = take({"n"});
    if (spec.kind == GeneratorKind::planted) {
        spec.m = take({"covers", "m"});
    } else {
        spec.m = take({"m"});
    }
    if (spec.kind == GeneratorKind::uniform) {
        spec.edgeSize = take({"size", "edgeSize"});
    }
    if (auto it = params.find("seed"); it != params.end()) {
        spec.seed = it->second;
        params.erase(it);
    }
    if (!params.empty()) {
        throw InputError("unknown generator parameter: " + params.begin()->first);
    }
    if (spec.n < 1) {
        throw InputError("generator needs n >= 1");
    }
    if (spec.kind == GeneratorKind::planted && spec.m < 1) {
        throw InputError("planted generator needs covers >= 1");
    }
    if (spec.kind == GeneratorKind::uniform && (spec.edgeSize < 1 || spec.edgeSize > spec.n)) {
        throw InputError("uniform generator needs 1 <= size <= n");
    }
    if (spec.kind == GeneratorKind::starved && spec.n < 2) {
        throw InputError("starved generator needs n >= 2");
    }
    return spec;
}

InstanceSpec gen_planted(std::uint64_t n, std::uint64_t cover_count, std::uint64_t seed) {
    if (n < 1 || cover_count < 1) {
        throw InputError("planted generator needs n >= 1 and covers >= 1");
    }
    Rng rng(seed, kPlantedStream);
    InstanceSpec inst;
    inst.n = n;
    std::vector<std::uint64_t> part(n);
    std::vector<std::uint64_t> size;
    for (std::uint64_t round = 0; round < cover_count; ++round) {
        const std::uint64_t parts = 1 + rng.below(n);
        size.assign(parts, 0);
        for (std::uint64_t v = 0; v < n; ++v) {
            part[v] = rng.below(parts);
            ++size[part[v]];
        }
        // move nodes out of crowded parts until no part is empty
        std::uint64_t donor = 0;
        for (std::uint64_t p = 0; p < parts; ++p) {
            if (size[p] != 0) {
                continue;
            }
            while (size[part[donor]] < 2) {
                ++donor;
            }
            --size[part[donor]];
            part[donor] = p;
            ++size[p];
        }
        std::vector<Edge> edges(parts);
        for (std::uint64_t v = 0; v < n; ++v) {
            edges[part[v]].push_back(static_cast<NodeId>(v + 1));
        }
        for (Edge& e : edges) {
            inst.edges.push_back(std::move(e));
        }
    }
    shuffle(inst.edges, rng);
    return inst;
}

InstanceSpec gen_uniform(std::uint64_t n, std::uint64_t m, std::uint64_t edge_size,
                         std::uint64_t seed) {
    if (edge_size < 1 || edge_size > n) {
        throw InputError("uniform generator needs 1 <= size <= n");
    }
    Rng rng(seed, kUniformStream);
    InstanceSpec inst;
    inst.n = n;
    inst.edges.reserve(m);
    std::vector<NodeId> pool(n);
    for (std::uint64_t t = 0; t < m; ++t) {
        std::iota(pool.begin(), pool.end(), NodeId{1});
        for (std::uint64_t i = 0; i < edge_size; ++i) {
            std::swap(pool[i], pool[i + rng.below(n - i)]);
        }
        Edge e(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(edge_size));
        std::sort(e.begin(), e.end());
        inst.edges.push_back(std::move(e));
    }
    return inst;
}

InstanceSpec gen_full(std::uint64_t n, std::uint64_t m) {
    if (n < 1) {
        throw InputError("full generator needs n >= 1");
    }
    Edge all(n);
    std::iota(all.begin(), all.end(), NodeId{1});
    return {n, std::vector<Edge>(m, all)};
}

InstanceSpec gen_starved(std::uint64_t n, std::uint64_t m) {
    if (n < 2) {
        throw InputError("starved generator needs n >= 2");
    }
    const std::uint64_t period = ceil_sqrt(m) + 1;
    Edge most(n - 1);
    std::iota(most.begin(), most.end(), NodeId{1});
    Edge all = most;
    all.push_back(static_cast<NodeId>(n));
    InstanceSpec inst;
    inst.n = n;
    inst.edges.reserve(m);
    for (std::uint64_t t = 0; t < m; ++t) {
        inst.edges.push_back((t + 1) % period == 0 ? all : most);
    }
    return inst;
}

InstanceSpec generate(const GeneratorSpec& spec) {
    switch (spec.kind) {
        case GeneratorKind::planted: return gen_planted(spec.n, spec.m, spec.seed);
        case GeneratorKind::uniform: return gen_uniform(spec.n, spec.m, spec.edgeSize, spec.seed);
        case GeneratorKind::full: return gen_full(spec.n, spec.m);
        case GeneratorKind::starved: return gen_starved(spec.n, spec.m);
    }
    throw InputError("unknown generator kind");
}

}  // namespace dsc
