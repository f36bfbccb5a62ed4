#pragma once

#include <cstdint>
#include <vector>

namespace permspec {

inline constexpr std::int64_t kQuadraticCap = 2000;

struct PsiTable {
    std::int64_t n = 0;
    double theta = 1.0;
    std::vector<double> values;  // Psi_n(1..n) at index 0..n-1

    double operator()(std::int64_t j) const { return values[static_cast<std::size_t>(j - 1)]; }
};

// Psi_n(j) = prod_{i<j} (n-i)/(theta+n-1-i), all j at once in O(n).
PsiTable psi_table(std::int64_t n, double theta);

double psi(std::int64_t n, std::int64_t j, double theta);

// A_n^delta = prod_{k=1}^n (k+delta)/k.
double cesaro_number(std::int64_t n, double delta);

// A_0^delta .. A_n^delta.
std::vector<double> cesaro_numbers(std::int64_t n, double delta);

// sigma_n^theta(w) = theta/(theta+n) sum_j Psi_n(j) w_j; w holds w_0..w_n with w_0 = 0.
double cesaro_mean(const std::vector<double>& w, double theta);

// Same quantity through sum_j A_{n-j}^{theta-1}/A_n^theta w_j.
double cesaro_mean_from_numbers(const std::vector<double>& w, double theta);

struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double relative_gap() const;
};

IdentityCheck verify_mean_identity(std::int64_t n, double theta);
IdentityCheck verify_harmonic_identity(std::int64_t n, double theta);
IdentityCheck verify_quadratic_identity(std::int64_t n, double theta, std::int64_t cap = kQuadraticCap);
IdentityCheck verify_telescoping(std::int64_t n, std::int64_t j, double theta);

double absolute_quadratic_sum(std::int64_t n, double theta, std::int64_t cap = kQuadraticCap);

// [sum_{j<=n} Psi_n(j) w_j / j] / (theta log n); w holds w_0..w_n.
// For weights with Cesaro limit L the ratio tends to L / theta, slowly.
double log_weighted_ratio(const std::vector<double>& w, double theta);

}  // namespace permspec
