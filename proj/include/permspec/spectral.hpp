#pragma once

#include "permspec/ewens.hpp"
#include "permspec/rng.hpp"

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace permspec {

using Fraction = boost::rational<std::int64_t>;

// A point on the circle in turns. When `exact` is set, counting uses it and
// `value` is only its double image.
struct Endpoint {
    double value = 0.0;
    std::optional<Fraction> exact;

    static Endpoint real(double v) { return {v, std::nullopt}; }
    static Endpoint rational(std::int64_t p, std::int64_t q);
    static Endpoint rational(const Fraction& f);

    std::int64_t floor_times(std::int64_t j) const;  // floor(j x)
    double frac_times(std::int64_t j) const;         // {j x}
};

// Half-open arc (alpha, beta], 0 <= alpha < 1, alpha < beta <= alpha + 1.
struct Arc {
    Endpoint alpha;
    Endpoint beta;

    Endpoint width() const;
};

// Throws std::invalid_argument when the endpoints violate the arc invariants.
Arc make_arc(const Endpoint& alpha, const Endpoint& beta);
Arc make_arc(double alpha, double beta);

struct PhasedCycle {
    std::int64_t length = 0;
    double phase = 0.0;
};

struct ModifiedSpectrum {
    std::int64_t n = 0;
    std::vector<PhasedCycle> cycles;
};

struct CountMoments {
    double mean = 0.0;
    double variance = 0.0;
};

inline constexpr std::int64_t kPermVarianceCap = 5000;

inline double frac(double x) { return x - std::floor(x); }

std::int64_t count_arc_perm(const CycleCounts& counts, const Arc& arc);

ModifiedSpectrum attach_phases(const CycleCounts& counts, Rng& rng);

// Angles (k + phi)/j in (alpha, beta].
std::int64_t count_arc_mod(const ModifiedSpectrum& spectrum, const Arc& arc);

// Angles (k + phi)/j in [alpha, beta).
std::int64_t count_arc_mod_closed_open(const ModifiedSpectrum& spectrum, const Arc& arc);

struct AngleMultiplicity {
    Fraction angle;
    std::int64_t multiplicity = 0;
};

std::vector<AngleMultiplicity> enumerate_angles_perm(const CycleCounts& counts);

std::vector<double> enumerate_angles_mod(const ModifiedSpectrum& spectrum);

// Throws std::length_error when n exceeds cap (the variance is an O(n^2) sum).
CountMoments exact_moments_perm(std::int64_t n, double theta, const Arc& arc,
                                std::int64_t cap = kPermVarianceCap);

// Mean only, O(n); no cap.
double exact_mean_perm(std::int64_t n, double theta, const Arc& arc);

CountMoments exact_moments_mod(std::int64_t n, double theta, const Arc& arc);

// g({x+T}, {y+T}) and g({x}, {y}) with g(a, b) = |a-b|(1-|a-b|).
std::pair<double, double> frac_shift_invariant(double x, double y, double t);

}  // namespace permspec
