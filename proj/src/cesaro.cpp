#include "permspec/cesaro.hpp"

#include "permspec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace permspec {

namespace {

void check_theta(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw std::domain_error("theta must be positive");
}

void check_cap(std::int64_t n, std::int64_t cap) {
    if (n > cap) throw std::length_error("quadratic sum: n exceeds the configured cap");
}

}  // namespace

PsiTable psi_table(std::int64_t n, double theta) {
    if (n < 1) throw std::domain_error("psi_table: n must be positive");
    check_theta(theta);
    PsiTable t;
    t.n = n;
    t.theta = theta;
    t.values.resize(static_cast<std::size_t>(n));
    double p = 1.0;
    for (std::int64_t i = 0; i < n; ++i) {
        p *= static_cast<double>(n - i) / (theta + static_cast<double>(n - 1 - i));
        t.values[static_cast<std::size_t>(i)] = p;
    }
    return t;
}

double psi(std::int64_t n, std::int64_t j, double theta) {
    if (j < 1 || j > n) throw std::domain_error("psi: j outside [1, n]");
    check_theta(theta);
    double p = 1.0;
    for (std::int64_t i = 0; i < j; ++i)
        p *= static_cast<double>(n - i) / (theta + static_cast<double>(n - 1 - i));
    return p;
}

std::vector<double> cesaro_numbers(std::int64_t n, double delta) {
    if (n < 0) throw std::domain_error("cesaro_numbers: n must be non-negative");
    if (delta < 0 && delta == std::floor(delta))
        throw std::domain_error("cesaro_numbers: delta is a negative integer");
    std::vector<double> a(static_cast<std::size_t>(n + 1));
    a[0] = 1.0;
    for (std::int64_t k = 1; k <= n; ++k)
        a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k - 1)] * (k + delta) / k;
    return a;
}

double cesaro_number(std::int64_t n, double delta) { return cesaro_numbers(n, delta).back(); }

double cesaro_mean(const std::vector<double>& w, double theta) {
    if (w.empty()) throw std::invalid_argument("cesaro_mean: w must hold w_0");
    const auto n = static_cast<std::int64_t>(w.size()) - 1;
    if (n == 0) return 0.0;
    const PsiTable t = psi_table(n, theta);
    CompensatedSum s;
    for (std::int64_t j = 1; j <= n; ++j) s += t(j) * w[static_cast<std::size_t>(j)];
    return theta / (theta + n) * s.value();
}

double cesaro_mean_from_numbers(const std::vector<double>& w, double theta) {
    if (w.empty()) throw std::invalid_argument("cesaro_mean_from_numbers: w must hold w_0");
    check_theta(theta);
    const auto n = static_cast<std::int64_t>(w.size()) - 1;
    if (n == 0) return 0.0;
    const auto am1 = cesaro_numbers(n, theta - 1.0);
    const double an = cesaro_number(n, theta);
    CompensatedSum s;
    for (std::int64_t j = 1; j <= n; ++j)
        s += am1[static_cast<std::size_t>(n - j)] / an * w[static_cast<std::size_t>(j)];
    return s.value();
}

double IdentityCheck::relative_gap() const {
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return std::abs(lhs - rhs) / scale;
}

IdentityCheck verify_mean_identity(std::int64_t n, double theta) {
    const PsiTable t = psi_table(n, theta);
    CompensatedSum s;
    for (double v : t.values) s += v;
    return {s.value() / n, 1.0 / theta};
}

IdentityCheck verify_harmonic_identity(std::int64_t n, double theta) {
    const PsiTable t = psi_table(n, theta);
    CompensatedSum l, r;
    for (std::int64_t j = 1; j <= n; ++j) {
        l += t(j) / j;
        r += 1.0 / (theta + j - 1);
    }
    return {l.value(), r.value()};
}

namespace {

template <class Term>
double quadratic_sum(std::int64_t n, const PsiTable& t, Term term) {
    CompensatedSum s;
    for (std::int64_t j = 1; j <= n; ++j) {
        for (std::int64_t k = 1; k <= n; ++k) {
            const double prod = t(j) * t(k) - (j + k <= n ? t(j + k) : 0.0);
            s += term(prod) / (static_cast<double>(j) * static_cast<double>(k));
        }
    }
    return s.value();
}

}  // namespace

IdentityCheck verify_quadratic_identity(std::int64_t n, double theta, std::int64_t cap) {
    check_cap(n, cap);
    const PsiTable t = psi_table(n, theta);
    const double lhs = quadratic_sum(n, t, [](double x) { return x; });
    CompensatedSum r;
    for (std::int64_t k = 0; k < n; ++k) r += 1.0 / ((theta + k) * (theta + k));
    return {lhs, r.value()};
}

double absolute_quadratic_sum(std::int64_t n, double theta, std::int64_t cap) {
    check_cap(n, cap);
    const PsiTable t = psi_table(n, theta);
    return quadratic_sum(n, t, [](double x) { return std::abs(x); });
}

IdentityCheck verify_telescoping(std::int64_t n, std::int64_t j, double theta) {
    if (j < 1 || j > n - 1) throw std::domain_error("verify_telescoping: need 1 <= j <= n-1");
    check_theta(theta);
    const auto am1 = cesaro_numbers(n, theta - 1.0);
    const auto a = cesaro_numbers(n, theta);
    CompensatedSum l;
    for (std::int64_t p = j; p <= n - 1; ++p)
        l += am1[static_cast<std::size_t>(p - j)] / (p * a[static_cast<std::size_t>(p)]);
    const double rhs = psi(n, j, theta) * (1.0 / j - 1.0 / n);
    return {l.value(), rhs};
}

double log_weighted_ratio(const std::vector<double>& w, double theta) {
    if (w.size() < 3) throw std::invalid_argument("log_weighted_ratio: need n >= 2");
    const auto n = static_cast<std::int64_t>(w.size()) - 1;
    const PsiTable t = psi_table(n, theta);
    CompensatedSum s;
    for (std::int64_t j = 1; j <= n; ++j) {
        if (w[static_cast<std::size_t>(j)] < 0.0)
            throw std::invalid_argument("log_weighted_ratio: weights must be non-negative");
        s += t(j) * w[static_cast<std::size_t>(j)] / j;
    }
    return s.value() / (theta * std::log(static_cast<double>(n)));
}

}  // namespace permspec
