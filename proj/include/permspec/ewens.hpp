#pragma once

#include "permspec/rng.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace permspec {

struct EwensParams {
    double theta = 1.0;

    explicit EwensParams(double theta_);
};

// Bits xi_1..xi_horizon; bits[0] is position 1 and is always 1.
struct BernoulliWord {
    std::int64_t n = 0;
    std::vector<std::uint8_t> bits;
    std::int64_t horizon = 0;
};

// Cycle type a_{n,j}. Absent keys have multiplicity 0.
class CycleCounts {
public:
    CycleCounts() = default;

    // Throws std::invalid_argument unless sum j * a_j == n with a_j >= 0, 1 <= j <= n.
    CycleCounts(std::int64_t n, std::map<std::int64_t, std::int64_t> counts);

    std::int64_t n() const { return n_; }
    const std::map<std::int64_t, std::int64_t>& counts() const { return counts_; }
    std::int64_t multiplicity(std::int64_t j) const;
    std::int64_t total_cycles() const;

    bool operator==(const CycleCounts&) const = default;
    auto operator<=>(const CycleCounts&) const = default;

private:
    std::int64_t n_ = 0;
    std::map<std::int64_t, std::int64_t> counts_;
};

CycleCounts cycle_counts_from_lengths(std::int64_t n, const std::vector<std::int64_t>& lengths);

struct CoupledSample {
    CycleCounts cycle_counts;
    std::vector<std::int64_t> poisson_counts;  // W_1..W_n at index 0..n-1
    std::int64_t horizon = 0;
    double tail_bound = 0.0;
};

struct AgeOrderedCycles {
    std::int64_t n = 0;
    std::vector<std::int64_t> lengths;
};

inline constexpr std::int64_t kDefaultHorizonCap = std::int64_t{1} << 50;

BernoulliWord sample_bernoulli_word(std::int64_t n, const EwensParams& params, Rng& rng);

// Spacings between consecutive ones of (xi_1 .. xi_n, 1).
CycleCounts cycle_counts_from_word(const BernoulliWord& word);

// Positions of the ones of the Feller word in [1, limit], drawn by jumping
// straight from one success to the next (inverse-cdf on the waiting time).
// Same law as the bitwise word; cost grows with the number of ones only.
std::vector<std::int64_t> sample_word_ones(std::int64_t limit, const EwensParams& params, Rng& rng);

// Ewens cycle counts through the Feller word, using sample_word_ones.
CycleCounts sample_cycle_counts(std::int64_t n, const EwensParams& params, Rng& rng);

// Expected number of j-spacings (j <= n) of the infinite word whose right
// end lies beyond position H, summed over j. Requires H >= n.
double coupling_tail_expectation(std::int64_t n, double theta, std::int64_t horizon);

// Smallest H = n * 2^k whose tail expectation is <= epsilon_tail.
// Throws std::runtime_error if H would exceed horizon_cap.
std::int64_t coupling_horizon(std::int64_t n, double theta, double epsilon_tail,
                              std::int64_t horizon_cap = kDefaultHorizonCap);

CoupledSample sample_coupled(std::int64_t n, const EwensParams& params, Rng& rng,
                             double epsilon_tail, std::int64_t horizon_cap = kDefaultHorizonCap);

// Same as sample_coupled with a precomputed horizon and tail bound.
CoupledSample sample_coupled_with_horizon(std::int64_t n, const EwensParams& params, Rng& rng,
                                          std::int64_t horizon, double tail_bound);

// Chinese restaurant: element i opens a new cycle with probability theta/(theta+i-1),
// otherwise it joins the cycle of a uniformly chosen earlier element.
AgeOrderedCycles sample_age_ordered(std::int64_t n, const EwensParams& params, Rng& rng);

double log_cycle_type_probability(const CycleCounts& counts, const EwensParams& params);
double cycle_type_probability(const CycleCounts& counts, const EwensParams& params);

// Stick breaking with Beta(1, theta) fractions.
std::vector<double> sample_gem(const EwensParams& params, std::int64_t m, Rng& rng);

// All cycle types of n, in lexicographic order of their count maps.
std::vector<CycleCounts> enumerate_cycle_types(std::int64_t n);

}  // namespace permspec
