#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "permspec/ewens.hpp"
#include "permspec/experiments.hpp"
#include "permspec/stats.hpp"

#include <cmath>
#include <map>
#include <vector>

using namespace permspec;

namespace {

BernoulliWord word_of(std::vector<std::uint8_t> bits) {
    BernoulliWord w;
    w.n = static_cast<std::int64_t>(bits.size());
    w.horizon = w.n;
    w.bits = std::move(bits);
    return w;
}

double expected_cycles(std::int64_t n, double theta) {
    double s = 0.0;
    for (std::int64_t k = 0; k < n; ++k) s += theta / (theta + k);
    return s;
}

double variance_cycles(std::int64_t n, double theta) {
    double s = 0.0;
    for (std::int64_t k = 0; k < n; ++k) s += theta * k / ((theta + k) * (theta + k));
    return s;
}

template <class Sampler>
double cycle_type_chi2_p(std::int64_t n, double theta, std::int64_t m, std::uint64_t seed, Sampler sample) {
    const EwensParams params(theta);
    const auto types = enumerate_cycle_types(n);
    std::map<CycleCounts, std::size_t> index;
    for (std::size_t i = 0; i < types.size(); ++i) index[types[i]] = i;
    std::vector<std::int64_t> obs(types.size(), 0);
    for (std::int64_t t = 0; t < m; ++t) {
        Rng rng = trial_rng(seed, 9, static_cast<std::uint64_t>(t));
        ++obs[index.at(sample(n, params, rng))];
    }
    std::vector<double> p;
    for (const auto& c : types) p.push_back(cycle_type_probability(c, params));
    return chi_square_test(obs, p).p_value;
}

}  // namespace

TEST_CASE("EwensParams rejects non-positive theta") {
    CHECK_THROWS(EwensParams(0.0));
    CHECK_THROWS(EwensParams(-1.0));
    CHECK_NOTHROW(EwensParams(0.01));
}

TEST_CASE("CycleCounts validates the size constraint") {
    CHECK_THROWS(CycleCounts(3, {{1, 1}, {2, 2}}));
    CHECK_THROWS(CycleCounts(3, {{4, 1}}));
    CHECK_THROWS(CycleCounts(3, {{1, -1}, {2, 2}}));
    const CycleCounts c(5, {{2, 1}, {3, 1}, {4, 0}});
    CHECK(c.multiplicity(4) == 0);
    CHECK(c.counts().size() == 2);
    CHECK(c.total_cycles() == 2);
}

TEST_CASE("bernoulli word basics") {
    Rng rng = trial_rng(1, 0, 0);
    const auto w = sample_bernoulli_word(1, EwensParams(3.0), rng);
    CHECK(w.bits == std::vector<std::uint8_t>{1});
    const auto big = sample_bernoulli_word(50, EwensParams(1e9), rng);
    int ones = 0;
    for (auto b : big.bits) ones += b;
    CHECK(ones >= 49);
    CHECK_THROWS(sample_bernoulli_word(0, EwensParams(1.0), rng));
}

TEST_CASE("bernoulli word density follows the harmonic sum") {
    Rng rng = trial_rng(2, 0, 0);
    const std::int64_t n = 1'000'000;
    const auto w = sample_bernoulli_word(n, EwensParams(1.0), rng);
    double ones = 0;
    for (auto b : w.bits) ones += b;
    CHECK(std::abs(ones - expected_cycles(n, 1.0)) < 4.0 * std::sqrt(variance_cycles(n, 1.0)));
}

TEST_CASE("cycle counts from hand-made words") {
    CHECK(cycle_counts_from_word(word_of({1})) == CycleCounts(1, {{1, 1}}));
    CHECK(cycle_counts_from_word(word_of({1, 1, 1})) == CycleCounts(3, {{1, 3}}));
    CHECK(cycle_counts_from_word(word_of({1, 0, 0, 1, 0})) == CycleCounts(5, {{3, 1}, {2, 1}}));
    CHECK(cycle_counts_from_word(word_of({1, 0, 0, 0})) == CycleCounts(4, {{4, 1}}));
}

TEST_CASE("cycle type probabilities") {
    CHECK(cycle_type_probability(CycleCounts(1, {{1, 1}}), EwensParams(0.7)) == doctest::Approx(1.0));
    CHECK(cycle_type_probability(CycleCounts(3, {{3, 1}}), EwensParams(1.0)) == doctest::Approx(1.0 / 3));
    CHECK(cycle_type_probability(CycleCounts(3, {{1, 3}}), EwensParams(2.0)) == doctest::Approx(1.0 / 3));
    for (std::int64_t n = 1; n <= 12; ++n) {
        for (double th : {0.3, 1.0, 2.5}) {
            double total = 0.0;
            for (const auto& c : enumerate_cycle_types(n)) total += cycle_type_probability(c, EwensParams(th));
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    // log space keeps large n finite
    const double lp = log_cycle_type_probability(CycleCounts(300, {{300, 1}}), EwensParams(1.0));
    CHECK(lp == doctest::Approx(-std::log(300.0)).epsilon(1e-10));
}

TEST_CASE("partition enumeration counts") {
    const std::size_t p[] = {1, 2, 3, 5, 7, 11, 15, 22, 30, 42};
    for (std::int64_t n = 1; n <= 10; ++n) CHECK(enumerate_cycle_types(n).size() == p[n - 1]);
}

TEST_CASE("samplers reproduce Ewens cycle-type frequencies") {
    for (double th : {0.5, 1.0, 2.0}) {
        for (std::int64_t n : {3, 5}) {
            CHECK(cycle_type_chi2_p(n, th, 20000, 11, [](std::int64_t n_, const EwensParams& p, Rng& r) {
                      return cycle_counts_from_word(sample_bernoulli_word(n_, p, r));
                  }) > 0.001);
            CHECK(cycle_type_chi2_p(n, th, 20000, 12, [](std::int64_t n_, const EwensParams& p, Rng& r) {
                      return sample_cycle_counts(n_, p, r);
                  }) > 0.001);
            CHECK(cycle_type_chi2_p(n, th, 20000, 13, [](std::int64_t n_, const EwensParams& p, Rng& r) {
                      return cycle_counts_from_lengths(n_, sample_age_ordered(n_, p, r).lengths);
                  }) > 0.001);
        }
    }
}

TEST_CASE("jump sampler: number of cycles at large n") {
    for (double th : {0.3, 2.0}) {
        const std::int64_t n = 1'000'000, m = 4000;
        double s = 0;
        for (std::int64_t t = 0; t < m; ++t) {
            Rng rng = trial_rng(77, 0, static_cast<std::uint64_t>(t));
            s += static_cast<double>(sample_cycle_counts(n, EwensParams(th), rng).total_cycles());
        }
        const double se = std::sqrt(variance_cycles(n, th) / m);
        CHECK(std::abs(s / m - expected_cycles(n, th)) < 4 * se);
    }
}

TEST_CASE("age-ordered sampler") {
    Rng rng = trial_rng(3, 0, 0);
    CHECK(sample_age_ordered(1, EwensParams(1.0), rng).lengths == std::vector<std::int64_t>{1});
    const std::int64_t m = 60000;
    double hits = 0;
    for (std::int64_t t = 0; t < m; ++t) {
        Rng r = trial_rng(4, 0, static_cast<std::uint64_t>(t));
        hits += sample_age_ordered(3, EwensParams(1.0), r).lengths.size() == 1;
    }
    const double p = 1.0 / 3.0;
    CHECK(std::abs(hits / m - p) < 4 * std::sqrt(p * (1 - p) / m));

    const std::int64_t n = 10000, trials = 2000;
    double k = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng r = trial_rng(5, 0, static_cast<std::uint64_t>(t));
        const auto a = sample_age_ordered(n, EwensParams(2.0), r);
        std::int64_t total = 0;
        for (auto l : a.lengths) total += l;
        REQUIRE(total == n);
        k += static_cast<double>(a.lengths.size());
    }
    CHECK(std::abs(k / trials - expected_cycles(n, 2.0)) < 3 * std::sqrt(variance_cycles(n, 2.0) / trials));
}

TEST_CASE("first age-ordered cycle is uniform under theta = 1") {
    // P(L_1 = k) = 1/n for the uniform measure.
    const std::int64_t n = 8, m = 40000;
    std::vector<std::int64_t> obs(n, 0);
    for (std::int64_t t = 0; t < m; ++t) {
        Rng r = trial_rng(6, 0, static_cast<std::uint64_t>(t));
        ++obs[sample_age_ordered(n, EwensParams(1.0), r).lengths.front() - 1];
    }
    std::vector<double> p(n, 1.0 / n);
    CHECK(chi_square_test(obs, p).p_value > 0.001);
}

TEST_CASE("GEM stick breaking") {
    Rng rng = trial_rng(8, 0, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto g = sample_gem(EwensParams(1.5), 30, rng);
        double partial = 0.0;
        for (double x : g) {
            REQUIRE(x > 0.0);
            REQUIRE(x < 1.0);
            const double next = partial + x;
            REQUIRE(next > partial);
            partial = next;
        }
        REQUIRE(partial < 1.0);
    }
    for (auto [th, mean] : {std::pair{1.0, 0.5}, std::pair{2.0, 1.0 / 3.0}}) {
        const int m = 100000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < m; ++i) {
            const double g1 = sample_gem(EwensParams(th), 1, rng)[0];
            s += g1;
            s2 += g1 * g1;
        }
        const double mu = s / m, var = s2 / m - mu * mu;
        CHECK(std::abs(mu - mean) < 4 * std::sqrt(var / m));
    }
}

TEST_CASE("coupling tail expectation against a direct sum") {
    // Expected j-spacings starting at k: p_k prod_{i=1}^{j-1} (1 - p_{k+i}) p_{k+j}.
    const std::int64_t n = 10, h = 50, kmax = 2'000'000;
    for (double th : {0.5, 1.0, 2.0}) {
        auto p = [&](std::int64_t k) { return k == 1 ? 1.0 : th / (th + k - 1); };
        double direct = 0.0;
        for (std::int64_t j = 1; j <= n; ++j) {
            for (std::int64_t k = std::max<std::int64_t>(1, h - j + 1); k <= kmax; ++k) {
                double term = p(k) * p(k + j);
                for (std::int64_t i = 1; i < j; ++i) term *= 1.0 - p(k + i);
                direct += term;
            }
        }
        CHECK(std::abs(coupling_tail_expectation(n, th, h) - direct) < 1e-4);
    }
    CHECK(coupling_tail_expectation(7, 1.0, 70) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("coupled sample structure") {
    Rng rng = trial_rng(9, 0, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const auto s = sample_coupled(40, EwensParams(0.8), rng, 1e-3);
        REQUIRE(s.tail_bound <= 1e-3);
        REQUIRE(s.horizon >= 40);
        std::int64_t total = 0;
        for (const auto& [j, a] : s.cycle_counts.counts()) total += j * a;
        REQUIRE(total == 40);
        // Spacings strictly inside 1..n are shared; only the spacing closed by
        // the sentinel can be missing from W.
        std::int64_t excess = 0;
        for (std::int64_t j = 1; j <= 40; ++j)
            excess += std::max<std::int64_t>(0, s.cycle_counts.multiplicity(j) - s.poisson_counts[j - 1]);
        REQUIRE(excess <= 1);
    }
    CHECK_THROWS_AS(sample_coupled(100, EwensParams(1.0), rng, 1e-9, 1 << 20), std::runtime_error);
}

TEST_CASE("coupling distance at n = 1") {
    const auto r = run_coupling_check(1, 1.0, 20000, 10, 1e-5);
    CHECK(r.bound == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.empirical_mean_distance + r.tail_bound <= r.bound + 3 * r.std_error);
}

TEST_CASE("coupling distance at n = 500, theta = 0.5") {
    const auto r = run_coupling_check(500, 0.5, 10000, 11, 1e-5);
    CHECK(r.bound == doctest::Approx(2.0 + 0.5 * (kEulerGamma + digamma(0.5))));
    CHECK(r.empirical_mean_distance + r.tail_bound <= r.bound + 3 * r.std_error);
}
