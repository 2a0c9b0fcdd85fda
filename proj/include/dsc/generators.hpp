#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "dsc/model.hpp"

namespace dsc {

enum class GeneratorKind { planted, uniform, full, starved };

/// `m` is the cover count for `planted` and the edge count otherwise.
struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::planted;
    std::uint64_t n = 1;
    std::uint64_t m = 1;
    std::uint64_t edgeSize = 1;  // uniform only
    std::uint64_t seed = 0;
};

/// Parses "kind:key=value,..." e.g. "planted:n=8,covers=32",
/// "uniform:n=16,m=1000,size=4", "full:n=4,m=10", "starved:n=8,m=100".
/// An optional "seed=" parameter overrides `seed`.
GeneratorSpec parse_generator_spec(std::string_view text, std::uint64_t seed);

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(std::string_view kind);
std::string describe(const GeneratorSpec& spec);

/// `cover_count` rounds, each a random partition of all nodes into 1..n
/// nonempty edges, with the concatenated edges shuffled.
InstanceSpec gen_planted(std::uint64_t n, std::uint64_t cover_count, std::uint64_t seed);

/// `m` edges, each a uniform random `edge_size`-subset of the nodes.
InstanceSpec gen_uniform(std::uint64_t n, std::uint64_t m, std::uint64_t edge_size,
                         std::uint64_t seed);

/// `m` copies of the full node set.
InstanceSpec gen_full(std::uint64_t n, std::uint64_t m);

/// Edges {1..n-1}, except that every (s+1)-th edge is the full node set,
/// s = ceil(sqrt(m)); node n stays at low degree.
InstanceSpec gen_starved(std::uint64_t n, std::uint64_t m);

InstanceSpec generate(const GeneratorSpec& spec);

}  // namespace dsc
