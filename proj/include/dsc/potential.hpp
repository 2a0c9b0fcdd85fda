#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dsc/engine.hpp"

namespace dsc {

/// Enumeration too large for the configured limit.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Sum with Neumaier compensation.
class CompensatedSum {
public:
    void add(double x) noexcept;
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// d_k(m) = h * sum_{j=1..m} 2^k / (2^k - j + 1), accumulated left to right.
/// Throws DomainError if m > 2^k.
double d_k(Phase k, std::uint64_t m, std::uint32_t h);

/// H(2^k) - H(2^k - q_k).
double harmonic_gap(Phase k, std::uint64_t n);

/// Memoized prefix values of d_k for one h, extended on demand.
class DCache {
public:
    explicit DCache(std::uint32_t h) : h_(h) {}

    double value(Phase k, std::uint64_t m);
    [[nodiscard]] std::uint32_t h() const noexcept { return h_; }

private:
    struct Prefix {
        std::vector<double> sum{0.0};
        std::vector<double> comp{0.0};
    };
    std::uint32_t h_;
    std::vector<Prefix> by_phase_;
};

/// Z_i, exp(Z_i) and Phi for every node.
///
/// Kept in step with an EngineState by apply(); nodes touched since the last
/// resync are tracked in `dirty` so resync() can recompute only those.
struct PotentialView {
    std::vector<double> z;
    std::vector<double> e;   // exp(z)
    double phi = 0.0;
    std::vector<NodeId> dirty;
    std::vector<std::uint8_t> is_dirty;

    /// Incremental update after apply_color; Phi matches phi_after_candidate bit for bit.
    void apply(const EngineState& after, const StepChange& change);

    /// Recomputes dirty nodes from scratch and re-sums Phi.
    void resync(const EngineState& state, DCache& cache);
};

/// Z_i from its definition.
double node_potential(const NodeState& node, std::uint32_t h, DCache& cache);

/// From-scratch Z_i and Phi.
PotentialView recompute_phi(const EngineState& state, DCache& cache);

/// Change of Z_i when node `v` is in the colored edge.
/// `w_step` is whether w (rather than s) gets incremented, `new_color` whether
/// the node gathers a color it did not hold, `count_before` is |C_{v,kstar}|.
double z_delta(std::uint32_t h, Phase phase, bool w_step, Phase kstar, bool new_color,
               std::uint64_t count_before);

/// Compensated sum of exp(Z_i) over the nodes outside `edge`.
double phi_outside(const PotentialView& view, const Edge& edge);

/// Evaluates Phi after candidate colorings of one edge.
///
/// Phi is formed as phi_outside + the edge members' new exp(Z_i), in edge
/// order, which is also how PotentialView::apply forms it, so a candidate's
/// value equals the tracked Phi after applying it bit for bit.
class CandidateScorer {
public:
    CandidateScorer(const EngineState& state, const PotentialView& view, const Edge& edge);

    /// Per-member outcomes for palette k.
    struct Palette {
        Phase k = 0;
        std::vector<double> keep;     // exp(Z_i') if the color is already held
        std::vector<double> gather;   // exp(Z_i') if the color is new to the member
        std::vector<std::uint64_t> held;  // |C_{i,k}|
    };

    [[nodiscard]] Phase pS() const noexcept { return pS_; }
    [[nodiscard]] double outside() const noexcept { return outside_; }
    [[nodiscard]] Palette palette(Phase k) const;

    /// Phi after coloring the edge with `color` from palette p.k.
    [[nodiscard]] double phi(const Palette& p, Color color) const;
    /// Phi when exactly the members at `holders` (edge positions) already hold the color.
    [[nodiscard]] double phi_for_holders(const Palette& p,
                                         const std::vector<std::size_t>& holders) const;

private:
    const EngineState& state_;
    const Edge& edge_;
    Phase pS_;
    double outside_;
    std::vector<double> z_;
};

/// Phi of the state apply_color(state, edge, kstar, color) would produce.
double phi_after_candidate(const EngineState& state, const PotentialView& view,
                           const Edge& edge, Phase kstar, Color color);

/// Colors of one palette grouped by the set of edge members already holding them.
struct ColorClass {
    Color representative = 0;   // smallest color in the class
    std::uint64_t size = 0;
    std::vector<std::size_t> holders;  // positions in the edge, ascending
};

/// Every class of palette `kstar` with respect to `edge`, ordered by representative.
/// Throws CapacityError when the number of distinct held colors exceeds `max_classes`.
std::vector<ColorClass> color_classes(const EngineState& state, const Edge& edge, Phase kstar,
                                      std::size_t max_classes = std::size_t{1} << 22);

/// Smallest color of palette k held by no member of `edge`, if any.
std::optional<Color> smallest_fresh_color(const EngineState& state, const Edge& edge, Phase k);

/// E[Phi^t] over the two-stage uniform choice. Exact: by linearity each member
/// contributes keep with probability |C_{i,k}|/2^k and gather otherwise.
double exact_expected_phi(const EngineState& state, const PotentialView& view, const Edge& edge);

/// Same expectation as a weighted sum over color classes.
double exact_expected_phi_classes(const EngineState& state, const PotentialView& view,
                                  const Edge& edge);

/// Same expectation by scanning every color of every palette in the window.
/// Throws CapacityError when the window holds more than `max_colors` colors.
double exact_expected_phi_naive(const EngineState& state, const PotentialView& view,
                                const Edge& edge, std::uint64_t max_colors = 1u << 20);

/// Non-negative fraction in lowest terms.
struct Rational {
    unsigned __int128 num = 0;
    unsigned __int128 den = 1;

    static Rational of(unsigned __int128 num, unsigned __int128 den);
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b) = default;
    [[nodiscard]] double to_double() const;
};

/// Probability that |C_{node, p(node)}| grows in this step, by enumerating
/// every (kstar, color) pair.
Rational check_growth_probability(const EngineState& state, const Edge& edge, NodeId node);

}  // namespace dsc
