#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dsc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (instance files, CLI specs, traces).
class InputError : public Error {
public:
    using Error::Error;
};

/// A color or phase index that does not fit the 64-bit color space.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Argument outside a function's mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A call whose preconditions on the engine state do not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A runtime-checked property of the algorithm failed.
class InvariantViolation : public Error {
public:
    InvariantViolation(std::uint64_t step, std::string lemma, const std::string& detail)
        : Error("step " + std::to_string(step) + ": " + lemma + " violated: " + detail),
          step_(step),
          lemma_(std::move(lemma)) {}

    [[nodiscard]] std::uint64_t step() const noexcept { return step_; }
    [[nodiscard]] const std::string& lemma() const noexcept { return lemma_; }

private:
    std::uint64_t step_;
    std::string lemma_;
};

using NodeId = std::uint32_t;   // 1-based, as in the instance file
using Phase = std::uint32_t;
using Color = std::uint64_t;

/// Sorted, duplicate-free list of 1-based node ids.
using Edge = std::vector<NodeId>;

/// Largest phase whose palette fits a 64-bit color.
inline constexpr Phase kMaxPhase = 61;

struct PaletteRange {
    Color lo;
    Color hi;

    [[nodiscard]] Color size() const noexcept { return hi - lo + 1; }
    [[nodiscard]] bool contains(Color c) const noexcept { return c >= lo && c <= hi; }
    friend bool operator==(const PaletteRange&, const PaletteRange&) = default;
};

/// Colors of palette k: {2^k, ..., 2^{k+1} - 1}.
PaletteRange palette_range(Phase k);

/// Palette index of a color: floor(log2 c).
Phase palette_of(Color c);

/// Colors a node must gather from palette k to finish phase k:
/// ceil((1 - 1/(2n)) * 2^k), evaluated in exact integer arithmetic.
std::uint64_t quota(Phase k, std::uint64_t n);

/// Window width h = max(1, ceil(log2 n)).
struct PaletteParams {
    std::uint64_t n = 1;
    std::uint32_t h = 1;

    static PaletteParams for_nodes(std::uint64_t n);
    friend bool operator==(const PaletteParams&, const PaletteParams&) = default;
};

/// ln(4e * n), the constant that appears in every counter and phase bound.
double log_four_e_n(std::uint64_t n);

/// The online input: n nodes and hyperedges in arrival order (a multiset).
struct InstanceSpec {
    std::uint64_t n = 1;
    std::vector<Edge> edges;

    friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

/// Sorts and deduplicates node ids, then checks range and non-emptiness.
/// `index` is used only to name the offending edge in the error message.
Edge normalize_edge(std::vector<NodeId> nodes, std::uint64_t n, std::size_t index);

/// Checks every invariant of InstanceSpec; throws InputError on violation.
void validate_instance(const InstanceSpec& instance);

/// Parses the canonical JSON form {"n": <int>, "edges": [[...], ...]}.
InstanceSpec parse_instance(std::string_view text);

/// Canonical JSON form; parse_instance(serialize_instance(x)) == x.
std::string serialize_instance(const InstanceSpec& instance);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string instance_digest(const InstanceSpec& instance);

/// Degree of every node (index 0 holds node 1).
std::vector<std::uint64_t> degrees(const InstanceSpec& instance);

/// delta(E): minimum final degree.
std::uint64_t min_degree(const InstanceSpec& instance);

}  // namespace dsc
