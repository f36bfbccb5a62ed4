#pragma once

#include "permspec/spectral.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace permspec {

namespace constants {
inline constexpr double sqrt2 = 1.41421356237309504880168872420969808;
inline constexpr double sqrt3 = 1.73205080756887729352744634150587237;
inline constexpr double golden = 1.61803398874989484820458683436563812;
inline constexpr double e = 2.71828182845904523536028747135266250;
}  // namespace constants

inline constexpr std::int64_t kNumericLimitN = 1'000'000;

// Declared arithmetic nature of a real number. Never inferred from a float.
struct Irrational {
    double value = 0.0;
};
using RealClass = std::variant<Fraction, Irrational>;

struct BothIrrationalIndependent {
    double alpha_value = 0.0;
    double beta_value = 0.0;
};
struct RationalAlpha {
    std::int64_t p = 0, q = 1;
    double beta_value = 0.0;
};
struct RationalBeta {
    double alpha_value = 0.0;
    std::int64_t r = 0, s = 1;
};
struct BothRational {
    std::int64_t p = 0, q = 1, r = 0, s = 1;
};
// beta = p/q + (r/s) alpha with alpha irrational.
struct AffineRelated {
    std::int64_t p = 0, q = 1, r = 1, s = 1;
    double alpha_value = 0.0;
};

using ArcClass = std::variant<BothIrrationalIndependent, RationalAlpha, RationalBeta, BothRational, AffineRelated>;

// Throws std::invalid_argument on non-coprime pairs, q or s < 1, or r == 0 in AffineRelated.
void validate(const ArcClass& cls);

// Endpoints of the class as numbers (exact where rational).
Endpoint class_alpha(const ArcClass& cls);
Endpoint class_beta(const ArcClass& cls);

// Limiting constants.
double second_moment_closed(const RealClass& x);  // lim (1/n) sum {jx}^2
double c2_closed(const ArcClass& cls);
double s3_closed(const ArcClass& cls);  // lim (1/n) sum {j alpha}{j beta}
double ell_closed(const RealClass& delta);
double c2_meso(const RealClass& alpha);

// Partial averages at n.
double c_numeric(const Endpoint& s, const Endpoint& t, const Endpoint& u, const Endpoint& v, std::int64_t n);
double c_numeric(double s, double t, double u, double v, std::int64_t n);
double ctilde_numeric(const Endpoint& s, const Endpoint& t, const Endpoint& u, const Endpoint& v, std::int64_t n);
double ctilde_numeric(double s, double t, double u, double v, std::int64_t n);
double s3_numeric(const Endpoint& a, const Endpoint& b, std::int64_t n);
double second_moment_numeric(const Endpoint& x, std::int64_t n);

// Period of the sequence {j x} for rational x, or nullopt.
std::optional<std::int64_t> period(const Endpoint& x);

// (1/n) sum f({j t + b}).
double equidistribution_average(const std::function<double(double)>& f, double t, double b, std::int64_t n);

struct CovarianceMatrix {
    std::size_t dim = 0;
    std::vector<double> entries;  // row-major

    double operator()(std::size_t k, std::size_t l) const { return entries[k * dim + l]; }
    double min_eigenvalue() const;
};

struct ClassifiedArc {
    Arc arc;
    std::optional<ArcClass> cls;         // enables the closed-form diagonal of D
    std::optional<RealClass> width_class;  // enables the closed-form diagonal of D tilde
};

// D_{kl} = c_{kl} / sqrt(c_kk c_ll). Throws std::domain_error on a degenerate arc.
CovarianceMatrix covariance_D(const std::vector<ClassifiedArc>& arcs, std::int64_t n_numeric = kNumericLimitN);
CovarianceMatrix covariance_Dtilde(const std::vector<ClassifiedArc>& arcs, std::int64_t n_numeric = kNumericLimitN);

}  // namespace permspec
