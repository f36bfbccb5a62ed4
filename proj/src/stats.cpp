#include "permspec/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace permspec {

double digamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double r = 1.0 / (x * x);
    // B2k / (2k) for k = 1..7
    const double series =
        r * (1.0 / 12 - r * (1.0 / 120 - r * (1.0 / 252 - r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r / 12.0))))));
    return acc + std::log(x) - 0.5 / x - series;
}

namespace {

// Stirling remainder lgamma(x) - [(x - 1/2) log x - x + log(2 pi)/2], x >= 10.
double stirling_tail(double x) {
    const double r = 1.0 / (x * x);
    return (1.0 / 12 - r * (1.0 / 360 - r * (1.0 / 1260 - r * (1.0 / 1680 - r / 1188.0)))) / x;
}

}  // namespace

double log_gamma_ratio(double x, double a) {
    if (a == 0.0) return 0.0;
    if (x < 10.0) {
        double acc = 0.0;
        while (x < 10.0) {
            acc -= std::log1p(a / x);
            x += 1.0;
        }
        return acc + log_gamma_ratio(x, a);
    }
    const double y = x + a;
    const double main = (x - 0.5) * std::log1p(a / x) + a * std::log(y) - a;
    return main + stirling_tail(y) - stirling_tail(x);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;  // series converges slowly; Q is 1 to double precision here
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-10) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> sorted, const std::function<double(double)>& cdf) {
    if (sorted.size() < 8) throw std::invalid_argument("ks_test: need at least 8 samples");
    if (!std::is_sorted(sorted.begin(), sorted.end()))
        throw std::invalid_argument("ks_test: samples must be sorted ascending");
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, (i + 1) / m - f, f - i / m});
    }
    KsResult r;
    r.sample_size = sorted.size();
    r.statistic = std::clamp(d, 0.0, 1.0);
    r.p_value = kolmogorov_survival(std::sqrt(m) * r.statistic);
    return r;
}

KsResult ks_test_lattice(std::span<const std::int64_t> sorted, double mean, double sd) {
    if (sorted.size() < 8) throw std::invalid_argument("ks_test_lattice: need at least 8 samples");
    if (!std::is_sorted(sorted.begin(), sorted.end()))
        throw std::invalid_argument("ks_test_lattice: samples must be sorted ascending");
    if (!(sd > 0.0)) throw std::invalid_argument("ks_test_lattice: sd must be positive");
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    std::size_t idx = 0;
    for (std::int64_t k = sorted.front() - 1; k <= sorted.back(); ++k) {
        while (idx < sorted.size() && sorted[idx] <= k) ++idx;
        const double f = normal_cdf((static_cast<double>(k) + 0.5 - mean) / sd);
        d = std::max(d, std::abs(idx / m - f));
    }
    KsResult r;
    r.sample_size = sorted.size();
    r.statistic = std::clamp(d, 0.0, 1.0);
    r.p_value = kolmogorov_survival(std::sqrt(m) * r.statistic);
    return r;
}

double chi_square_survival(double stat, double dof) {
    if (stat <= 0.0) return 1.0;
    return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

ChiSquareResult chi_square_test(std::span<const std::int64_t> observed,
                                std::span<const double> probabilities) {
    if (observed.size() != probabilities.size() || observed.size() < 2)
        throw std::invalid_argument("chi_square_test: size mismatch or fewer than 2 cells");
    double total = 0.0;
    for (auto o : observed) total += static_cast<double>(o);
    CompensatedSum stat;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = total * probabilities[i];
        if (!(e > 0.0)) throw std::invalid_argument("chi_square_test: zero expected count");
        const double diff = static_cast<double>(observed[i]) - e;
        stat += diff * diff / e;
    }
    ChiSquareResult r;
    r.statistic = stat.value();
    r.dof = static_cast<double>(observed.size() - 1);
    r.p_value = chi_square_survival(r.statistic, r.dof);
    return r;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty input");
    const double h = (sorted.size() - 1) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

MeanVar sample_moments(std::span<const double> xs) {
    MeanVar r;
    if (xs.empty()) return r;
    CompensatedSum s;
    for (double x : xs) s += x;
    r.mean = s.value() / xs.size();
    CompensatedSum s2, s4;
    for (double x : xs) {
        const double d = x - r.mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    r.variance = xs.size() > 1 ? s2.value() / (xs.size() - 1) : 0.0;
    r.m4 = s4.value() / xs.size();
    return r;
}

}  // namespace permspec
