#include "permspec/spectral.hpp"

#include "permspec/cesaro.hpp"
#include "permspec/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace permspec {

namespace {

using i128 = __int128;

i128 floor_div(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

double to_double(const Fraction& f) {
    return static_cast<double>(f.numerator()) / static_cast<double>(f.denominator());
}

}  // namespace

Endpoint Endpoint::rational(std::int64_t p, std::int64_t q) {
    if (q == 0) throw std::invalid_argument("Endpoint: zero denominator");
    return rational(Fraction(p, q));
}

Endpoint Endpoint::rational(const Fraction& f) { return {to_double(f), f}; }

std::int64_t Endpoint::floor_times(std::int64_t j) const {
    if (exact) {
        return static_cast<std::int64_t>(
            floor_div(static_cast<i128>(j) * exact->numerator(), exact->denominator()));
    }
    return static_cast<std::int64_t>(std::floor(static_cast<double>(j) * value));
}

double Endpoint::frac_times(std::int64_t j) const {
    if (exact) {
        const i128 num = static_cast<i128>(j) * exact->numerator();
        const i128 den = exact->denominator();
        const i128 r = num - floor_div(num, den) * den;
        return static_cast<double>(r) / static_cast<double>(den);
    }
    return frac(static_cast<double>(j) * value);
}

Endpoint Arc::width() const {
    if (alpha.exact && beta.exact) return Endpoint::rational(*beta.exact - *alpha.exact);
    return Endpoint::real(beta.value - alpha.value);
}

Arc make_arc(const Endpoint& alpha, const Endpoint& beta) {
    bool ok;
    if (alpha.exact && beta.exact) {
        const Fraction& a = *alpha.exact;
        const Fraction& b = *beta.exact;
        const Fraction zero(0), one(1);
        ok = a >= zero && a < one && a < b && b <= a + one;
    } else {
        ok = alpha.value >= 0.0 && alpha.value < 1.0 && alpha.value < beta.value &&
             beta.value <= alpha.value + 1.0;
    }
    if (!ok) throw std::invalid_argument("arc: need 0 <= alpha < 1 and alpha < beta <= alpha + 1");
    return {alpha, beta};
}

Arc make_arc(double alpha, double beta) { return make_arc(Endpoint::real(alpha), Endpoint::real(beta)); }

std::int64_t count_arc_perm(const CycleCounts& counts, const Arc& arc) {
    std::int64_t total = 0;
    for (const auto& [j, a] : counts.counts())
        total += a * (arc.beta.floor_times(j) - arc.alpha.floor_times(j));
    return total;
}

ModifiedSpectrum attach_phases(const CycleCounts& counts, Rng& rng) {
    ModifiedSpectrum s;
    s.n = counts.n();
    s.cycles.reserve(static_cast<std::size_t>(counts.total_cycles()));
    for (const auto& [j, a] : counts.counts())
        for (std::int64_t p = 0; p < a; ++p) s.cycles.push_back({j, uniform01(rng)});
    return s;
}

namespace {

// floor(j x - phi) and ceil(j x - phi), reading {j x} exactly when x is rational.
std::int64_t floor_shifted(const Endpoint& x, std::int64_t j, double phi) {
    return x.floor_times(j) - (x.frac_times(j) < phi ? 1 : 0);
}

std::int64_t ceil_shifted(const Endpoint& x, std::int64_t j, double phi) {
    return x.floor_times(j) + (x.frac_times(j) > phi ? 1 : 0);
}

}  // namespace

std::int64_t count_arc_mod(const ModifiedSpectrum& spectrum, const Arc& arc) {
    std::int64_t total = 0;
    for (const auto& c : spectrum.cycles)
        total += floor_shifted(arc.beta, c.length, c.phase) - floor_shifted(arc.alpha, c.length, c.phase);
    return total;
}

std::int64_t count_arc_mod_closed_open(const ModifiedSpectrum& spectrum, const Arc& arc) {
    std::int64_t total = 0;
    for (const auto& c : spectrum.cycles)
        total += ceil_shifted(arc.beta, c.length, c.phase) - ceil_shifted(arc.alpha, c.length, c.phase);
    return total;
}

std::vector<AngleMultiplicity> enumerate_angles_perm(const CycleCounts& counts) {
    // Reduced-fraction keys k/j, sorted then merged.
    std::vector<std::pair<Fraction, std::int64_t>> all;
    for (const auto& [j, a] : counts.counts())
        for (std::int64_t k = 0; k < j; ++k) all.emplace_back(Fraction(k, j), a);
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<AngleMultiplicity> out;
    for (const auto& [angle, mult] : all) {
        if (!out.empty() && out.back().angle == angle)
            out.back().multiplicity += mult;
        else
            out.push_back({angle, mult});
    }
    return out;
}

std::vector<double> enumerate_angles_mod(const ModifiedSpectrum& spectrum) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(spectrum.n));
    for (const auto& c : spectrum.cycles)
        for (std::int64_t k = 0; k < c.length; ++k)
            out.push_back((static_cast<double>(k) + c.phase) / static_cast<double>(c.length));
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::vector<double> omegas(std::int64_t n, const Arc& arc) {
    std::vector<double> w(static_cast<std::size_t>(n + 1), 0.0);
    for (std::int64_t j = 1; j <= n; ++j)
        w[static_cast<std::size_t>(j)] = arc.beta.frac_times(j) - arc.alpha.frac_times(j);
    return w;
}

double width_value(const Arc& arc) { return arc.width().value; }

}  // namespace

double exact_mean_perm(std::int64_t n, double theta, const Arc& arc) {
    if (n < 1) throw std::invalid_argument("exact_mean_perm: n must be positive");
    const PsiTable t = psi_table(n, theta);
    const auto w = omegas(n, arc);
    CompensatedSum s;
    for (std::int64_t j = 1; j <= n; ++j) s += w[static_cast<std::size_t>(j)] * t(j) / j;
    return static_cast<double>(n) * width_value(arc) - theta * s.value();
}

CountMoments exact_moments_perm(std::int64_t n, double theta, const Arc& arc, std::int64_t cap) {
    if (n < 1) throw std::invalid_argument("exact_moments_perm: n must be positive");
    if (n > cap) throw std::length_error("exact_moments_perm: n exceeds the variance cap");
    const PsiTable t = psi_table(n, theta);
    const auto w = omegas(n, arc);
    CompensatedSum mean_sum, diag, cross, single;
    for (std::int64_t j = 1; j <= n; ++j) {
        const double wj = w[static_cast<std::size_t>(j)];
        mean_sum += wj * t(j) / j;
        diag += wj * wj * t(j) / j;
    }
    // sum_{j,k} w_j w_k Psi(j) Psi(k) / (jk) factorizes as (sum_j w_j Psi(j)/j)^2.
    for (std::int64_t j = 1; j < n; ++j) {
        const double wj = w[static_cast<std::size_t>(j)];
        if (wj == 0.0) continue;
        for (std::int64_t k = 1; j + k <= n; ++k)
            cross += wj * w[static_cast<std::size_t>(k)] * t(j + k) / (static_cast<double>(j) * k);
    }
    const double m = mean_sum.value();
    CountMoments r;
    r.mean = static_cast<double>(n) * width_value(arc) - theta * m;
    r.variance = theta * diag.value() + theta * theta * (cross.value() - m * m);
    if (r.variance < 0.0 && r.variance > -1e-9) r.variance = 0.0;
    return r;
}

CountMoments exact_moments_mod(std::int64_t n, double theta, const Arc& arc) {
    if (n < 1) throw std::invalid_argument("exact_moments_mod: n must be positive");
    const PsiTable t = psi_table(n, theta);
    const Endpoint d = arc.width();
    CompensatedSum s;
    for (std::int64_t j = 1; j <= n; ++j) {
        const double f = d.frac_times(j);
        s += t(j) / j * f * (1.0 - f);
    }
    return {static_cast<double>(n) * d.value, theta * s.value()};
}

std::pair<double, double> frac_shift_invariant(double x, double y, double t) {
    auto g = [](double a, double b) {
        const double d = std::abs(a - b);
        return d * (1.0 - d);
    };
    return {g(frac(x + t), frac(y + t)), g(frac(x), frac(y))};
}

}  // namespace permspec
