#include "permspec/limits.hpp"

#include "permspec/stats.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace permspec {

namespace {

using i128 = __int128;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_pair(std::int64_t num, std::int64_t den, const char* what) {
    if (den < 1) throw std::invalid_argument(std::string(what) + ": denominator must be >= 1");
    if (std::gcd(num, den) != 1) throw std::invalid_argument(std::string(what) + ": pair is not coprime");
}

Endpoint difference(const Endpoint& a, const Endpoint& b) {
    if (a.exact && b.exact) return Endpoint::rational(*a.exact - *b.exact);
    return Endpoint::real(a.value - b.value);
}

// lim (1/n) sum {j p/q}^2 = (2q-1)(q-1)/(6q^2), as numerator over 6q^2.
i128 rational_second_moment_numerator(std::int64_t q) {
    return static_cast<i128>(2 * q - 1) * (q - 1);
}

}  // namespace

void validate(const ArcClass& cls) {
    std::visit(overloaded{
                   [](const BothIrrationalIndependent&) {},
                   [](const RationalAlpha& c) { check_pair(c.p, c.q, "RationalAlpha"); },
                   [](const RationalBeta& c) { check_pair(c.r, c.s, "RationalBeta"); },
                   [](const BothRational& c) {
                       check_pair(c.p, c.q, "BothRational alpha");
                       check_pair(c.r, c.s, "BothRational beta");
                   },
                   [](const AffineRelated& c) {
                       check_pair(c.p, c.q, "AffineRelated p/q");
                       if (c.r == 0) throw std::invalid_argument("AffineRelated: r must be nonzero");
                       check_pair(c.r, c.s, "AffineRelated r/s");
                   },
               },
               cls);
}

Endpoint class_alpha(const ArcClass& cls) {
    return std::visit(overloaded{
                          [](const BothIrrationalIndependent& c) { return Endpoint::real(c.alpha_value); },
                          [](const RationalAlpha& c) { return Endpoint::rational(c.p, c.q); },
                          [](const RationalBeta& c) { return Endpoint::real(c.alpha_value); },
                          [](const BothRational& c) { return Endpoint::rational(c.p, c.q); },
                          [](const AffineRelated& c) { return Endpoint::real(c.alpha_value); },
                      },
                      cls);
}

Endpoint class_beta(const ArcClass& cls) {
    return std::visit(overloaded{
                          [](const BothIrrationalIndependent& c) { return Endpoint::real(c.beta_value); },
                          [](const RationalAlpha& c) { return Endpoint::real(c.beta_value); },
                          [](const RationalBeta& c) { return Endpoint::rational(c.r, c.s); },
                          [](const BothRational& c) { return Endpoint::rational(c.r, c.s); },
                          [](const AffineRelated& c) {
                              return Endpoint::real(static_cast<double>(c.p) / c.q +
                                                    static_cast<double>(c.r) / c.s * c.alpha_value);
                          },
                      },
                      cls);
}

double second_moment_closed(const RealClass& x) {
    if (const auto* f = std::get_if<Fraction>(&x)) {
        const std::int64_t q = f->denominator();
        return static_cast<double>(rational_second_moment_numerator(q)) / (6.0 * q * q);
    }
    return 1.0 / 3.0;
}

namespace {

struct RationalSums {
    double c2;
    double s3;
};

RationalSums both_rational_sums(const BothRational& c) {
    const std::int64_t q = c.q, s = c.s;
    if (static_cast<i128>(q) * s > 100'000'000)
        throw std::invalid_argument("BothRational: period q*s too long for exact summation");
    const std::int64_t period = q * s;
    // S = sum_{j=1}^{qs} (jp mod q)(jr mod s), so that sum {jp/q}{jr/s} = S / (qs).
    i128 sum = 0;
    for (std::int64_t j = 1; j <= period; ++j) {
        std::int64_t a = (static_cast<i128>(j) * c.p) % q;
        std::int64_t b = (static_cast<i128>(j) * c.r) % s;
        if (a < 0) a += q;
        if (b < 0) b += s;
        sum += static_cast<i128>(a) * b;
    }
    // c2 = A/(6q^2) + B/(6s^2) - (2/(qs)) S/(qs) over the common denominator 6 q^2 s^2.
    const i128 q2 = static_cast<i128>(q) * q, s2 = static_cast<i128>(s) * s;
    const i128 num = rational_second_moment_numerator(q) * s2 + rational_second_moment_numerator(s) * q2 - 12 * sum;
    const i128 den = 6 * q2 * s2;
    RationalSums r;
    r.c2 = static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
    r.s3 = static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(q2 * s2));
    return r;
}

}  // namespace

double c2_closed(const ArcClass& cls) {
    validate(cls);
    return std::visit(overloaded{
                          [](const BothIrrationalIndependent&) { return 1.0 / 6.0; },
                          [](const RationalAlpha& c) { return 1.0 / 6.0 + 1.0 / (6.0 * c.q * c.q); },
                          [](const RationalBeta& c) { return 1.0 / 6.0 + 1.0 / (6.0 * c.s * c.s); },
                          [](const BothRational& c) { return both_rational_sums(c).c2; },
                          [](const AffineRelated& c) {
                              const double d = static_cast<double>(std::gcd(c.s, c.q));
                              return 1.0 / 6.0 - d * d / (6.0 * c.s * c.r * c.q * c.q);
                          },
                      },
                      cls);
}

double s3_closed(const ArcClass& cls) {
    validate(cls);
    return std::visit(overloaded{
                          [](const BothIrrationalIndependent&) { return 0.25; },
                          [](const RationalAlpha& c) { return 0.25 - 0.25 / c.q; },
                          [](const RationalBeta& c) { return 0.25 - 0.25 / c.s; },
                          [](const BothRational& c) { return both_rational_sums(c).s3; },
                          [](const AffineRelated& c) {
                              const double d = static_cast<double>(std::gcd(c.s, c.q));
                              return 0.25 + d * d / (12.0 * c.s * c.r * c.q * c.q);
                          },
                      },
                      cls);
}

double ell_closed(const RealClass& delta) {
    if (const auto* f = std::get_if<Fraction>(&delta)) {
        const double q = static_cast<double>(f->denominator());
        if (f->denominator() == 1) return 0.0;
        return 1.0 / 6.0 - 1.0 / (6.0 * q * q);
    }
    return 1.0 / 6.0;
}

double c2_meso(const RealClass& alpha) {
    if (const auto* f = std::get_if<Fraction>(&alpha)) {
        const double q = static_cast<double>(f->denominator());
        return 1.0 / 6.0 + 1.0 / (6.0 * q * q);
    }
    return 1.0 / 6.0;
}

double c_numeric(const Endpoint& s, const Endpoint& t, const Endpoint& u, const Endpoint& v, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("c_numeric: n must be positive");
    CompensatedSum acc;
    for (std::int64_t j = 1; j <= n; ++j)
        acc += (s.frac_times(j) - t.frac_times(j)) * (u.frac_times(j) - v.frac_times(j));
    return acc.value() / static_cast<double>(n);
}

double c_numeric(double s, double t, double u, double v, std::int64_t n) {
    return c_numeric(Endpoint::real(s), Endpoint::real(t), Endpoint::real(u), Endpoint::real(v), n);
}

double ctilde_numeric(const Endpoint& s, const Endpoint& t, const Endpoint& u, const Endpoint& v, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("ctilde_numeric: n must be positive");
    const Endpoint tu = difference(t, u), sv = difference(s, v), su = difference(s, u), tv = difference(t, v);
    auto h = [](const Endpoint& x, std::int64_t j) {
        const double f = x.frac_times(j);
        return f * (1.0 - f);
    };
    CompensatedSum acc;
    for (std::int64_t j = 1; j <= n; ++j) acc += h(tu, j) + h(sv, j) - h(su, j) - h(tv, j);
    return acc.value() / (2.0 * static_cast<double>(n));
}

double ctilde_numeric(double s, double t, double u, double v, std::int64_t n) {
    return ctilde_numeric(Endpoint::real(s), Endpoint::real(t), Endpoint::real(u), Endpoint::real(v), n);
}

double s3_numeric(const Endpoint& a, const Endpoint& b, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("s3_numeric: n must be positive");
    CompensatedSum acc;
    for (std::int64_t j = 1; j <= n; ++j) acc += a.frac_times(j) * b.frac_times(j);
    return acc.value() / static_cast<double>(n);
}

double second_moment_numeric(const Endpoint& x, std::int64_t n) { return s3_numeric(x, x, n); }

std::optional<std::int64_t> period(const Endpoint& x) {
    if (!x.exact) return std::nullopt;
    return x.exact->denominator();
}

double equidistribution_average(const std::function<double(double)>& f, double t, double b, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("equidistribution_average: n must be positive");
    CompensatedSum acc;
    for (std::int64_t j = 1; j <= n; ++j) acc += f(frac(static_cast<double>(j) * t + b));
    return acc.value() / static_cast<double>(n);
}

double CovarianceMatrix::min_eigenvalue() const {
    const auto m = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd a(m, m);
    for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::Index l = 0; l < m; ++l) a(k, l) = entries[static_cast<std::size_t>(k * m + l)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

namespace {

template <class Diag, class Off>
CovarianceMatrix normalized_matrix(const std::vector<ClassifiedArc>& arcs, Diag diag, Off off) {
    if (arcs.empty()) throw std::invalid_argument("covariance: need at least one arc");
    const std::size_t m = arcs.size();
    std::vector<double> d(m);
    for (std::size_t k = 0; k < m; ++k) {
        d[k] = diag(arcs[k]);
        if (!(d[k] > 1e-12)) throw std::domain_error("covariance: degenerate arc with zero limiting variance");
    }
    CovarianceMatrix c;
    c.dim = m;
    c.entries.assign(m * m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        c.entries[k * m + k] = 1.0;
        for (std::size_t l = k + 1; l < m; ++l) {
            const double v = off(arcs[k].arc, arcs[l].arc) / std::sqrt(d[k] * d[l]);
            c.entries[k * m + l] = v;
            c.entries[l * m + k] = v;
        }
    }
    return c;
}

}  // namespace

CovarianceMatrix covariance_D(const std::vector<ClassifiedArc>& arcs, std::int64_t n_numeric) {
    return normalized_matrix(
        arcs,
        [&](const ClassifiedArc& a) {
            if (a.cls) return c2_closed(*a.cls);
            return c_numeric(a.arc.beta, a.arc.alpha, a.arc.beta, a.arc.alpha, n_numeric);
        },
        [&](const Arc& x, const Arc& y) { return c_numeric(x.beta, x.alpha, y.beta, y.alpha, n_numeric); });
}

CovarianceMatrix covariance_Dtilde(const std::vector<ClassifiedArc>& arcs, std::int64_t n_numeric) {
    return normalized_matrix(
        arcs,
        [&](const ClassifiedArc& a) {
            if (a.width_class) return ell_closed(*a.width_class);
            return ctilde_numeric(a.arc.alpha, a.arc.beta, a.arc.alpha, a.arc.beta, n_numeric);
        },
        [&](const Arc& x, const Arc& y) { return ctilde_numeric(x.alpha, x.beta, y.alpha, y.beta, n_numeric); });
}

}  // namespace permspec
