#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace permspec {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// psi(x) for x > 0; recurrence up to x >= 10, then the asymptotic series.
double digamma(double x);

// lgamma(x + a) - lgamma(x) for x >= 1, a >= 0, without cancellation at large x.
double log_gamma_ratio(double x, double a);

double normal_cdf(double z);

// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

struct KsResult {
    std::size_t sample_size = 0;
    double statistic = 0.0;
    double p_value = 1.0;
};

// One-sample KS against a continuous cdf. Input must be sorted ascending and
// hold at least 8 values; throws std::invalid_argument otherwise.
KsResult ks_test(std::span<const double> sorted, const std::function<double(double)>& cdf);

// KS for integer-valued samples against N(mean, sd^2) discretized with a
// continuity correction: the empirical cdf at each integer k is compared with
// Phi((k + 1/2 - mean)/sd). Input sorted ascending, at least 8 values.
KsResult ks_test_lattice(std::span<const std::int64_t> sorted, double mean, double sd);

// Pearson chi-square upper tail P(chi2_dof >= stat).
double chi_square_survival(double stat, double dof);

struct ChiSquareResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

// Goodness of fit of observed counts against probabilities summing to 1.
ChiSquareResult chi_square_test(std::span<const std::int64_t> observed,
                                std::span<const double> probabilities);

// Linear-interpolated empirical quantile of sorted data (type 7).
double quantile_sorted(std::span<const double> sorted, double p);

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double m4 = 0.0;        // fourth central moment (biased)
};

// Two-pass moments with compensated sums, in index order.
MeanVar sample_moments(std::span<const double> xs);

}  // namespace permspec
