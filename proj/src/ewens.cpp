#include "permspec/ewens.hpp"

#include "permspec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace permspec {

EwensParams::EwensParams(double theta_) : theta(theta_) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("EwensParams: theta must be positive and finite");
}

CycleCounts::CycleCounts(std::int64_t n, std::map<std::int64_t, std::int64_t> counts) : n_(n) {
    if (n < 1) throw std::invalid_argument("CycleCounts: n must be positive");
    std::int64_t total = 0;
    for (const auto& [j, a] : counts) {
        if (j < 1 || j > n) throw std::invalid_argument("CycleCounts: length out of range: " + std::to_string(j));
        if (a < 0) throw std::invalid_argument("CycleCounts: negative multiplicity");
        if (a > 0) counts_.emplace(j, a);
        total += j * a;
    }
    if (total != n) throw std::invalid_argument("CycleCounts: sum of j*a_j differs from n");
}

std::int64_t CycleCounts::multiplicity(std::int64_t j) const {
    auto it = counts_.find(j);
    return it == counts_.end() ? 0 : it->second;
}

std::int64_t CycleCounts::total_cycles() const {
    std::int64_t k = 0;
    for (const auto& [j, a] : counts_) k += a;
    return k;
}

CycleCounts cycle_counts_from_lengths(std::int64_t n, const std::vector<std::int64_t>& lengths) {
    std::map<std::int64_t, std::int64_t> m;
    for (auto l : lengths) ++m[l];
    return CycleCounts(n, std::move(m));
}

BernoulliWord sample_bernoulli_word(std::int64_t n, const EwensParams& params, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_bernoulli_word: n must be positive");
    BernoulliWord w;
    w.n = n;
    w.horizon = n;
    w.bits.resize(static_cast<std::size_t>(n));
    w.bits[0] = 1;
    const double th = params.theta;
    for (std::int64_t k = 2; k <= n; ++k)
        w.bits[k - 1] = uniform01(rng) < th / (th + k - 1) ? 1 : 0;
    return w;
}

CycleCounts cycle_counts_from_word(const BernoulliWord& word) {
    const std::int64_t n = word.n;
    if (n < 1 || static_cast<std::int64_t>(word.bits.size()) < n || word.bits[0] != 1)
        throw std::invalid_argument("cycle_counts_from_word: malformed word");
    std::map<std::int64_t, std::int64_t> m;
    std::int64_t last = 1;
    for (std::int64_t k = 2; k <= n; ++k) {
        if (word.bits[k - 1]) {
            ++m[k - last];
            last = k;
        }
    }
    ++m[n + 1 - last];
    return CycleCounts(n, std::move(m));
}

namespace {

// Position of the first one after position k, or limit + 1 if none in (k, limit].
std::int64_t next_one(std::int64_t k, std::int64_t limit, double theta, Rng& rng) {
    if (k >= limit) return limit + 1;
    // P(no one in k+1..m) = exp(G(k) - G(m)), G(x) = lgamma(x + theta) - lgamma(x).
    const double log_u = std::log(uniform01_open_low(rng));
    const double gk = log_gamma_ratio(static_cast<double>(k), theta);
    auto log_surv = [&](std::int64_t m) {
        return gk - log_gamma_ratio(static_cast<double>(m), theta);
    };
    if (log_surv(limit) >= log_u) return limit + 1;
    std::int64_t lo = k, hi = limit;  // surv(lo) >= u > surv(hi)
    // Galloping from k keeps the common short waits cheap.
    std::int64_t step = 1;
    while (k + step < limit) {
        if (log_surv(k + step) < log_u) {
            hi = k + step;
            break;
        }
        lo = k + step;
        step *= 2;
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (log_surv(mid) < log_u)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace

std::vector<std::int64_t> sample_word_ones(std::int64_t limit, const EwensParams& params, Rng& rng) {
    if (limit < 1) throw std::invalid_argument("sample_word_ones: limit must be positive");
    std::vector<std::int64_t> ones{1};
    std::int64_t k = 1;
    while (true) {
        k = next_one(k, limit, params.theta, rng);
        if (k > limit) break;
        ones.push_back(k);
    }
    return ones;
}

CycleCounts sample_cycle_counts(std::int64_t n, const EwensParams& params, Rng& rng) {
    const auto ones = sample_word_ones(n, params, rng);
    std::map<std::int64_t, std::int64_t> m;
    for (std::size_t i = 1; i < ones.size(); ++i) ++m[ones[i] - ones[i - 1]];
    ++m[n + 1 - ones.back()];
    return CycleCounts(n, std::move(m));
}

double coupling_tail_expectation(std::int64_t n, double theta, std::int64_t horizon) {
    if (horizon < n) throw std::invalid_argument("coupling_tail_expectation: horizon below n");
    // Spacings of length j ending at or before H have expectation
    // theta * Psi_H(j) * (1/j - 1/H); the rest of theta/j is the tail.
    const double h = static_cast<double>(horizon);
    CompensatedSum total;
    double log_psi = 0.0;
    for (std::int64_t j = 1; j <= n; ++j) {
        log_psi += std::log1p((1.0 - theta) / (theta + h - static_cast<double>(j)));
        const double tail = theta * (-std::expm1(log_psi) / j + std::exp(log_psi) / h);
        total += tail;
    }
    return total.value();
}

std::int64_t coupling_horizon(std::int64_t n, double theta, double epsilon_tail, std::int64_t horizon_cap) {
    if (n < 1) throw std::invalid_argument("coupling_horizon: n must be positive");
    if (!(epsilon_tail > 0.0)) throw std::invalid_argument("coupling_horizon: epsilon_tail must be positive");
    std::int64_t h = n;
    while (coupling_tail_expectation(n, theta, h) > epsilon_tail) {
        if (h > horizon_cap / 2)
            throw std::runtime_error("coupling_horizon: epsilon_tail unreachable below the horizon cap");
        h *= 2;
    }
    return h;
}

CoupledSample sample_coupled_with_horizon(std::int64_t n, const EwensParams& params, Rng& rng,
                                          std::int64_t horizon, double tail_bound) {
    const auto ones = sample_word_ones(horizon, params, rng);
    CoupledSample s;
    s.horizon = horizon;
    s.tail_bound = tail_bound;
    s.poisson_counts.assign(static_cast<std::size_t>(n), 0);
    std::map<std::int64_t, std::int64_t> a;
    std::int64_t last_within = 1;
    for (std::size_t i = 1; i < ones.size(); ++i) {
        const std::int64_t gap = ones[i] - ones[i - 1];
        if (gap <= n) ++s.poisson_counts[static_cast<std::size_t>(gap - 1)];
        if (ones[i] <= n) {
            ++a[gap];
            last_within = ones[i];
        }
    }
    ++a[n + 1 - last_within];
    s.cycle_counts = CycleCounts(n, std::move(a));
    return s;
}

CoupledSample sample_coupled(std::int64_t n, const EwensParams& params, Rng& rng,
                             double epsilon_tail, std::int64_t horizon_cap) {
    const std::int64_t h = coupling_horizon(n, params.theta, epsilon_tail, horizon_cap);
    return sample_coupled_with_horizon(n, params, rng, h, coupling_tail_expectation(n, params.theta, h));
}

AgeOrderedCycles sample_age_ordered(std::int64_t n, const EwensParams& params, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_age_ordered: n must be positive");
    AgeOrderedCycles out;
    out.n = n;
    std::vector<std::int64_t> cycle_of(static_cast<std::size_t>(n));
    const double th = params.theta;
    for (std::int64_t i = 1; i <= n; ++i) {
        if (i == 1 || uniform01(rng) < th / (th + i - 1)) {
            cycle_of[i - 1] = static_cast<std::int64_t>(out.lengths.size());
            out.lengths.push_back(1);
        } else {
            auto e = static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(i - 1));
            if (e >= i - 1) e = i - 2;
            const std::int64_t c = cycle_of[e];
            cycle_of[i - 1] = c;
            ++out.lengths[c];
        }
    }
    return out;
}

double log_cycle_type_probability(const CycleCounts& counts, const EwensParams& params) {
    const double th = params.theta;
    const double n = static_cast<double>(counts.n());
    double lp = std::lgamma(n + 1.0);
    for (const auto& [j, a] : counts.counts())
        lp -= a * std::log(static_cast<double>(j)) + std::lgamma(a + 1.0);
    lp += counts.total_cycles() * std::log(th);
    lp -= std::lgamma(th + n) - std::lgamma(th);
    return lp;
}

double cycle_type_probability(const CycleCounts& counts, const EwensParams& params) {
    return std::exp(log_cycle_type_probability(counts, params));
}

std::vector<double> sample_gem(const EwensParams& params, std::int64_t m, Rng& rng) {
    if (m < 1) throw std::invalid_argument("sample_gem: m must be positive");
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(m));
    double remaining = 1.0;
    for (std::int64_t k = 0; k < m; ++k) {
        double u;
        do u = uniform01(rng);
        while (u == 0.0);
        const double v = -std::expm1(std::log(u) / params.theta);
        g.push_back(remaining * v);
        remaining *= 1.0 - v;
    }
    return g;
}

std::vector<CycleCounts> enumerate_cycle_types(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("enumerate_cycle_types: n must be positive");
    std::vector<CycleCounts> out;
    std::map<std::int64_t, std::int64_t> cur;
    std::function<void(std::int64_t, std::int64_t)> rec = [&](std::int64_t rest, std::int64_t max_part) {
        if (rest == 0) {
            out.emplace_back(n, cur);
            return;
        }
        for (std::int64_t j = std::min(rest, max_part); j >= 1; --j) {
            ++cur[j];
            rec(rest - j, j);
            if (--cur[j] == 0) cur.erase(j);
        }
    };
    rec(n, n);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace permspec
