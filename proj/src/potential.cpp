#include "dsc/potential.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace dsc {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        comp_ += (sum_ - t) + x;
    } else {
        comp_ += (x - t) + sum_;
    }
    sum_ = t;
}

namespace {

double pow2(Phase k) { return std::ldexp(1.0, static_cast<int>(k)); }

void check_d_domain(Phase k, std::uint64_t m) {
    if (k > kMaxPhase) {
        throw OverflowError("d_k: phase " + std::to_string(k) + " overflows the color space");
    }
    if (m > (std::uint64_t{1} << k)) {
        throw DomainError("d_k(m) needs m <= 2^k (k=" + std::to_string(k) +
                          ", m=" + std::to_string(m) + ")");
    }
}

// Asymptotic expansion of H(m); absolute error below 1e-18 for m > 2^20.
double harmonic_large(double m) {
    constexpr double euler_gamma = 0.57721566490153286061;
    const double inv = 1.0 / m;
    const double inv2 = inv * inv;
    return std::log(m) + euler_gamma + 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0;
}

constexpr std::uint64_t kHarmonicTable = std::uint64_t{1} << 20;

// H(m) for m <= 2^20
const std::vector<double>& harmonic_table() {
    static const std::vector<double> table = [] {
        std::vector<double> h(kHarmonicTable + 1, 0.0);
        CompensatedSum acc;
        for (std::uint64_t j = 1; j <= kHarmonicTable; ++j) {
            acc.add(1.0 / static_cast<double>(j));
            h[j] = acc.value();
        }
        return h;
    }();
    return table;
}

}  // namespace

double d_k(Phase k, std::uint64_t m, std::uint32_t h) {
    check_d_domain(k, m);
    const double size = pow2(k);
    CompensatedSum acc;
    for (std::uint64_t j = 1; j <= m; ++j) {
        acc.add(static_cast<double>(h) * size / (size - static_cast<double>(j) + 1.0));
    }
    return acc.value();
}

double harmonic_gap(Phase k, std::uint64_t n) {
    if (k > kMaxPhase) {
        throw OverflowError("harmonic_gap: phase " + std::to_string(k) + " overflows");
    }
    const std::uint64_t top = std::uint64_t{1} << k;
    const std::uint64_t bottom = top - quota(k, n);
    const auto& table = harmonic_table();
    if (top <= kHarmonicTable) {
        return table[top] - table[bottom];
    }
    if (bottom <= kHarmonicTable) {
        return harmonic_large(static_cast<double>(top)) - table[bottom];
    }
    const double a = static_cast<double>(top);
    const double b = static_cast<double>(bottom);
    return std::log(a / b) + 0.5 * (1.0 / a - 1.0 / b) -
           (1.0 / (a * a) - 1.0 / (b * b)) / 12.0;
}

double DCache::value(Phase k, std::uint64_t m) {
    check_d_domain(k, m);
    if (by_phase_.size() <= k) {
        by_phase_.resize(k + 1);
    }
    Prefix& p = by_phase_[k];
    const double size = pow2(k);
    while (p.sum.size() <= m) {
        const auto j = static_cast<double>(p.sum.size());
        const double term = static_cast<double>(h_) * size / (size - j + 1.0);
        // one Neumaier step from the stored (sum, comp) pair
        const double s = p.sum.back();
        const double t = s + term;
        const double c = std::abs(s) >= std::abs(term) ? (s - t) + term : (term - t) + s;
        p.sum.push_back(t);
        p.comp.push_back(p.comp.back() + c);
    }
    return p.sum[m] + p.comp[m];
}

double z_delta(std::uint32_t h, Phase phase, bool w_step, Phase kstar, bool new_color,
               std::uint64_t count_before) {
    double dz = 0.0;
    if (w_step) {
        dz += 1.0 / (4.0 * static_cast<double>(h) * pow2(phase));
    }
    if (new_color) {
        dz -= 1.0 / (2.0 * (pow2(kstar) - static_cast<double>(count_before)));
    }
    return dz;
}

void PotentialView::apply(const EngineState& after, const StepChange& change) {
    const std::uint32_t h = after.h();
    Edge members;
    members.reserve(change.nodes.size());
    for (const NodeChange& nc : change.nodes) {
        members.push_back(nc.node);
    }
    CompensatedSum total;
    total.add(phi_outside(*this, members));
    for (const NodeChange& nc : change.nodes) {
        const std::size_t i = nc.node - 1;
        const double dz = z_delta(h, nc.phase_before, nc.w_incremented, change.kstar,
                                  nc.new_color, nc.count_before);
        z[i] += dz;
        e[i] = std::exp(z[i]);
        total.add(e[i]);
        if (!is_dirty[i]) {
            is_dirty[i] = 1;
            dirty.push_back(nc.node);
        }
    }
    phi = total.value();
}

void PotentialView::resync(const EngineState& state, DCache& cache) {
    std::sort(dirty.begin(), dirty.end());
    for (NodeId v : dirty) {
        const std::size_t i = v - 1;
        z[i] = node_potential(state.nodes[i], state.h(), cache);
        e[i] = std::exp(z[i]);
        is_dirty[i] = 0;
    }
    dirty.clear();
    CompensatedSum total;
    for (double x : e) {
        total.add(x);
    }
    phi = total.value();
}

double node_potential(const NodeState& node, std::uint32_t h, DCache& cache) {
    CompensatedSum acc;
    auto wi = node.w.begin();
    auto ci = node.gathered.begin();
    while (wi != node.w.end() || ci != node.gathered.end()) {
        Phase k;
        if (ci == node.gathered.end() || (wi != node.w.end() && wi->first < ci->first)) {
            k = wi->first;
        } else {
            k = ci->first;
        }
        double term = 0.0;
        if (wi != node.w.end() && wi->first == k) {
            term += static_cast<double>(wi->second);
            ++wi;
        }
        if (ci != node.gathered.end() && ci->first == k) {
            term -= 2.0 * cache.value(k, ci->second.size());
            ++ci;
        }
        acc.add(term / (4.0 * static_cast<double>(h) * pow2(k)));
    }
    return acc.value();
}

PotentialView recompute_phi(const EngineState& state, DCache& cache) {
    PotentialView view;
    const std::size_t n = state.nodes.size();
    view.z.resize(n);
    view.e.resize(n);
    view.is_dirty.assign(n, 0);
    CompensatedSum total;
    for (std::size_t i = 0; i < n; ++i) {
        view.z[i] = node_potential(state.nodes[i], state.h(), cache);
        view.e[i] = std::exp(view.z[i]);
        total.add(view.e[i]);
    }
    view.phi = total.value();
    return view;
}

double phi_outside(const PotentialView& view, const Edge& edge) {
    CompensatedSum total;
    auto next = edge.begin();
    for (std::size_t i = 0; i < view.e.size(); ++i) {
        if (next != edge.end() && *next == i + 1) {
            ++next;
            continue;
        }
        total.add(view.e[i]);
    }
    return total.value();
}

CandidateScorer::CandidateScorer(const EngineState& state, const PotentialView& view,
                                 const Edge& edge)
    : state_(state), edge_(edge), pS_(min_phase(state, edge)), outside_(phi_outside(view, edge)) {
    z_.reserve(edge.size());
    for (NodeId v : edge) {
        z_.push_back(view.z[v - 1]);
    }
}

CandidateScorer::Palette CandidateScorer::palette(Phase k) const {
    const Phase window_end = pS_ + state_.h() - 1;
    if (k < pS_ || k > window_end) {
        throw PreconditionError("palette " + std::to_string(k) + " is outside the window");
    }
    palette_range(k);
    Palette p;
    p.k = k;
    p.keep.reserve(edge_.size());
    p.gather.reserve(edge_.size());
    p.held.reserve(edge_.size());
    for (std::size_t pos = 0; pos < edge_.size(); ++pos) {
        const NodeState& ns = state_.node(edge_[pos]);
        const std::uint64_t count = ns.gathered_count(k);
        const bool w_step = ns.phase <= window_end;
        const double keep = z_delta(state_.h(), ns.phase, w_step, k, false, count);
        p.keep.push_back(std::exp(z_[pos] + keep));
        if (count < palette_range(k).size()) {
            const double gather = z_delta(state_.h(), ns.phase, w_step, k, true, count);
            p.gather.push_back(std::exp(z_[pos] + gather));
        } else {
            p.gather.push_back(p.keep.back());  // no color is new to this member
        }
        p.held.push_back(count);
    }
    return p;
}

double CandidateScorer::phi(const Palette& p, Color color) const {
    CompensatedSum total;
    total.add(outside_);
    for (std::size_t pos = 0; pos < edge_.size(); ++pos) {
        const ColorSet* set = state_.node(edge_[pos]).gathered_in(p.k);
        const bool held = set != nullptr && set->contains(color);
        total.add(held ? p.keep[pos] : p.gather[pos]);
    }
    return total.value();
}

double CandidateScorer::phi_for_holders(const Palette& p,
                                        const std::vector<std::size_t>& holders) const {
    CompensatedSum total;
    total.add(outside_);
    auto next = holders.begin();
    for (std::size_t pos = 0; pos < edge_.size(); ++pos) {
        const bool held = next != holders.end() && *next == pos;
        if (held) {
            ++next;
        }
        total.add(held ? p.keep[pos] : p.gather[pos]);
    }
    return total.value();
}

double phi_after_candidate(const EngineState& state, const PotentialView& view,
                           const Edge& edge, Phase kstar, Color color) {
    check_candidate(state, edge, kstar, color);
    const CandidateScorer scorer(state, view, edge);
    return scorer.phi(scorer.palette(kstar), color);
}

std::vector<ColorClass> color_classes(const EngineState& state, const Edge& edge, Phase kstar,
                                      std::size_t max_classes) {
    const PaletteRange range = palette_range(kstar);
    struct Cursor {
        Color color;
        std::size_t pos;
        const Color* next;
        const Color* end;
    };
    auto later = [](const Cursor& a, const Cursor& b) {
        return a.color != b.color ? a.color > b.color : a.pos > b.pos;
    };
    std::vector<Cursor> heap;
    for (std::size_t pos = 0; pos < edge.size(); ++pos) {
        if (const ColorSet* set = state.node(edge[pos]).gathered_in(kstar); set && !set->empty()) {
            const Color* first = set->values().data();
            heap.push_back({*first, pos, first + 1, first + set->size()});
        }
    }
    std::make_heap(heap.begin(), heap.end(), later);

    // holders as a bitmask over edge positions
    const std::size_t words = (edge.size() + 63) / 64;
    std::map<std::vector<std::uint64_t>, std::size_t> index;
    std::vector<ColorClass> classes;
    std::vector<std::uint64_t> mask(words);
    std::uint64_t distinct = 0;
    Color fresh = range.lo;
    bool fresh_found = false;
    while (!heap.empty()) {
        const Color c = heap.front().color;
        std::fill(mask.begin(), mask.end(), 0);
        while (!heap.empty() && heap.front().color == c) {
            std::pop_heap(heap.begin(), heap.end(), later);
            Cursor& cur = heap.back();
            mask[cur.pos / 64] |= std::uint64_t{1} << (cur.pos % 64);
            if (cur.next != cur.end) {
                cur.color = *cur.next++;
                std::push_heap(heap.begin(), heap.end(), later);
            } else {
                heap.pop_back();
            }
        }
        if (++distinct > max_classes) {
            throw CapacityError("palette " + std::to_string(kstar) + " has more than " +
                                std::to_string(max_classes) + " held colors");
        }
        if (!fresh_found) {
            if (c == fresh) {
                ++fresh;
            } else {
                fresh_found = true;
            }
        }
        auto [it, inserted] = index.try_emplace(mask, classes.size());
        if (inserted) {
            ColorClass cls;
            cls.representative = c;
            for (std::size_t pos = 0; pos < edge.size(); ++pos) {
                if (mask[pos / 64] >> (pos % 64) & 1) {
                    cls.holders.push_back(pos);
                }
            }
            classes.push_back(std::move(cls));
        }
        ++classes[it->second].size;
    }
    if (distinct < range.size()) {
        classes.push_back({fresh, range.size() - distinct, {}});
    }
    std::sort(classes.begin(), classes.end(),
              [](const ColorClass& a, const ColorClass& b) {
                  return a.representative < b.representative;
              });
    return classes;
}

namespace {

// End of the run of consecutive colors in `v` that starts at index `at`.
Color run_end(const std::vector<Color>& v, std::size_t at) {
    std::size_t lo = at;
    std::size_t hi = v.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        if (v[mid] - v[at] == mid - at) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return v[lo];
}

}  // namespace

std::optional<Color> smallest_fresh_color(const EngineState& state, const Edge& edge, Phase k) {
    const PaletteRange range = palette_range(k);
    Color c = range.lo;
    bool moved = true;
    while (moved) {
        moved = false;
        for (NodeId v : edge) {
            const ColorSet* set = state.node(v).gathered_in(k);
            if (set == nullptr) {
                continue;
            }
            const auto& vals = set->values();
            const auto it = std::lower_bound(vals.begin(), vals.end(), c);
            if (it != vals.end() && *it == c) {
                const Color end = run_end(vals, static_cast<std::size_t>(it - vals.begin()));
                if (end >= range.hi) {
                    return std::nullopt;
                }
                c = end + 1;
                moved = true;
            }
        }
    }
    return c;
}

double exact_expected_phi(const EngineState& state, const PotentialView& view, const Edge& edge) {
    const CandidateScorer scorer(state, view, edge);
    const double h = static_cast<double>(state.h());
    CompensatedSum total;
    for (Phase k = scorer.pS(); k < scorer.pS() + state.h(); ++k) {
        const auto p = scorer.palette(k);
        const double size = pow2(k);
        CompensatedSum phi_k;
        phi_k.add(scorer.outside());
        for (std::size_t pos = 0; pos < edge.size(); ++pos) {
            const double held = static_cast<double>(p.held[pos]) / size;
            phi_k.add(held * p.keep[pos] + (1.0 - held) * p.gather[pos]);
        }
        total.add(phi_k.value() / h);
    }
    return total.value();
}

double exact_expected_phi_classes(const EngineState& state, const PotentialView& view,
                                  const Edge& edge) {
    const CandidateScorer scorer(state, view, edge);
    const double h = static_cast<double>(state.h());
    CompensatedSum total;
    for (Phase k = scorer.pS(); k < scorer.pS() + state.h(); ++k) {
        const auto p = scorer.palette(k);
        const double size = pow2(k);
        for (const ColorClass& cls : color_classes(state, edge, k)) {
            const double phi = scorer.phi_for_holders(p, cls.holders);
            total.add(phi * (static_cast<double>(cls.size) / size) / h);
        }
    }
    return total.value();
}

double exact_expected_phi_naive(const EngineState& state, const PotentialView& view,
                                const Edge& edge, std::uint64_t max_colors) {
    const Phase pS = min_phase(state, edge);
    std::uint64_t total_colors = 0;
    for (Phase k = pS; k < pS + state.h(); ++k) {
        if (k > 40 || (total_colors += palette_range(k).size()) > max_colors) {
            throw CapacityError("window too large for naive enumeration");
        }
    }
    const double h = static_cast<double>(state.h());
    CompensatedSum total;
    for (Phase k = pS; k < pS + state.h(); ++k) {
        const PaletteRange range = palette_range(k);
        const double weight = 1.0 / (h * pow2(k));
        for (Color c = range.lo; c <= range.hi; ++c) {
            total.add(phi_after_candidate(state, view, edge, k, c) * weight);
        }
    }
    return total.value();
}

namespace {

unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
    while (b != 0) {
        const unsigned __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace

Rational Rational::of(unsigned __int128 num, unsigned __int128 den) {
    if (den == 0) {
        throw DomainError("rational with zero denominator");
    }
    if (num == 0) {
        return {0, 1};
    }
    const unsigned __int128 g = gcd128(num, den);
    return {num / g, den / g};
}

Rational operator+(const Rational& a, const Rational& b) {
    const unsigned __int128 g = gcd128(a.den, b.den);
    const unsigned __int128 lcm = a.den / g * b.den;
    return Rational::of(a.num * (lcm / a.den) + b.num * (lcm / b.den), lcm);
}

Rational operator*(const Rational& a, const Rational& b) {
    const Rational x = Rational::of(a.num, b.den);
    const Rational y = Rational::of(b.num, a.den);
    return Rational::of(x.num * y.num, x.den * y.den);
}

double Rational::to_double() const {
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

Rational check_growth_probability(const EngineState& state, const Edge& edge, NodeId node) {
    const Phase pS = min_phase(state, edge);
    if (!std::binary_search(edge.begin(), edge.end(), node)) {
        throw PreconditionError("node " + std::to_string(node) + " is not in the hyperedge");
    }
    constexpr std::uint64_t enumeration_limit = std::uint64_t{1} << 20;
    const NodeState& ns = state.node(node);
    const Phase p = ns.phase;
    const ColorSet* held = ns.gathered_in(p);
    Rational total;
    for (Phase k = pS; k < pS + state.h(); ++k) {
        const PaletteRange range = palette_range(k);
        std::uint64_t growing = 0;
        if (k == p) {
            if (range.size() <= enumeration_limit) {
                for (Color c = range.lo; c <= range.hi; ++c) {
                    if (held == nullptr || !held->contains(c)) {
                        ++growing;
                    }
                }
            } else {
                growing = range.size() - (held == nullptr ? 0 : held->size());
            }
        }
        total = total + Rational::of(growing, static_cast<unsigned __int128>(state.h()) *
                                                  range.size());
    }
    return total;
}

}  // namespace dsc
