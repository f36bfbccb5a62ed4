#pragma once

#include "permspec/ewens.hpp"
#include "permspec/spectral.hpp"

#include <cstdint>

namespace permspec {

// Spacings in turns.
struct SpacingStats {
    double largest = 0.0;
    double smallest = 0.0;
    std::int64_t n = 0;
};

struct NormalizedSpacings {
    double nD = 0.0;
    double n2d = 0.0;
};

// max lcm(k, l) over present lengths k, l (k = l allowed); d_n is its inverse.
std::int64_t max_pairwise_lcm(const CycleCounts& counts);

// Exact extremal gaps between consecutive distinct angles of the unmodified spectrum.
Fraction min_gap_enumerated(const CycleCounts& counts);
Fraction max_gap_enumerated(const CycleCounts& counts);

// Smallest gap from the lcm formula, largest from enumeration.
SpacingStats spacings_perm(const CycleCounts& counts);

SpacingStats spacings_mod(const ModifiedSpectrum& spectrum);

// min over k, l of the circular distance between l/q + shift and k/p,
// equal to (1/(pq)) min({s p q}, 1 - {s p q}). Rejects non-coprime p, q.
double two_cycle_min_spacing(std::int64_t p, std::int64_t q, double shift);

NormalizedSpacings normalized_spacings(const SpacingStats& stats);

}  // namespace permspec
