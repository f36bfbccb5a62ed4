#include "permspec/spacings.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace permspec {

std::int64_t max_pairwise_lcm(const CycleCounts& counts) {
    std::vector<std::int64_t> lengths;
    for (const auto& [j, a] : counts.counts()) lengths.push_back(j);
    std::int64_t best = 0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        for (std::size_t k = i; k < lengths.size(); ++k) {
            const __int128 l = static_cast<__int128>(lengths[i] / std::gcd(lengths[i], lengths[k])) * lengths[k];
            best = std::max(best, static_cast<std::int64_t>(l));
        }
    }
    return best;
}

namespace {

template <class Pick>
Fraction scan_gaps(const CycleCounts& counts, Pick pick) {
    const auto angles = enumerate_angles_perm(counts);
    if (angles.size() == 1) return Fraction(1);
    Fraction out = angles[1].angle - angles[0].angle;
    for (std::size_t i = 1; i < angles.size(); ++i) out = pick(out, angles[i].angle - angles[i - 1].angle);
    return pick(out, Fraction(1) + angles.front().angle - angles.back().angle);
}

}  // namespace

Fraction min_gap_enumerated(const CycleCounts& counts) {
    return scan_gaps(counts, [](const Fraction& a, const Fraction& b) { return std::min(a, b); });
}

Fraction max_gap_enumerated(const CycleCounts& counts) {
    return scan_gaps(counts, [](const Fraction& a, const Fraction& b) { return std::max(a, b); });
}

SpacingStats spacings_perm(const CycleCounts& counts) {
    SpacingStats s;
    s.n = counts.n();
    s.smallest = 1.0 / static_cast<double>(max_pairwise_lcm(counts));
    const Fraction big = max_gap_enumerated(counts);
    s.largest = static_cast<double>(big.numerator()) / static_cast<double>(big.denominator());
    return s;
}

SpacingStats spacings_mod(const ModifiedSpectrum& spectrum) {
    const auto angles = enumerate_angles_mod(spectrum);
    SpacingStats s;
    s.n = spectrum.n;
    if (angles.size() == 1) {
        s.largest = s.smallest = 1.0;
        return s;
    }
    double lo = 1.0 + angles.front() - angles.back();
    double hi = lo;
    for (std::size_t i = 1; i < angles.size(); ++i) {
        const double g = angles[i] - angles[i - 1];
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    s.smallest = lo;
    s.largest = hi;
    return s;
}

double two_cycle_min_spacing(std::int64_t p, std::int64_t q, double shift) {
    if (p < 1 || q < 1) throw std::invalid_argument("two_cycle_min_spacing: p and q must be positive");
    if (std::gcd(p, q) != 1) throw std::invalid_argument("two_cycle_min_spacing: p and q must be coprime");
    const double pq = static_cast<double>(p) * static_cast<double>(q);
    const double f = frac(shift * pq);
    return std::min(f, 1.0 - f) / pq;
}

NormalizedSpacings normalized_spacings(const SpacingStats& stats) {
    const double n = static_cast<double>(stats.n);
    return {n * stats.largest, n * n * stats.smallest};
}

}  // namespace permspec
