#include "permspec/experiments.hpp"

#include "permspec/spacings.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace permspec {

namespace {

// Stream tags keep the random sources of different experiments apart.
constexpr std::uint64_t kStreamClt = 1;
constexpr std::uint64_t kStreamMeso = 100;
constexpr std::uint64_t kStreamCoupling = 200;
constexpr std::uint64_t kStreamSpacings = 300;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::optional<RealClass> alpha_class(const ClassifiedArc& a) {
    if (a.arc.alpha.exact) return RealClass{*a.arc.alpha.exact};
    if (!a.cls) return std::nullopt;
    return std::visit(overloaded{
                          [](const RationalAlpha& c) { return RealClass{Fraction(c.p, c.q)}; },
                          [](const BothRational& c) { return RealClass{Fraction(c.p, c.q)}; },
                          [&](const auto&) { return RealClass{Irrational{a.arc.alpha.value}}; },
                      },
                      *a.cls);
}

}  // namespace

std::string to_string(Model m) { return m == Model::perm ? "perm" : "mod"; }

Model model_from_string(const std::string& s) {
    if (s == "perm") return Model::perm;
    if (s == "mod") return Model::mod;
    throw std::invalid_argument("model must be perm or mod");
}

void ExperimentConfig::validate() const {
    if (n_schedule.empty()) throw std::invalid_argument("config: empty n schedule");
    for (auto n : n_schedule)
        if (n < 1) throw std::invalid_argument("config: n must be positive");
    if (!(theta > 0.0)) throw std::invalid_argument("config: theta must be positive");
    if (trials < 2) throw std::invalid_argument("config: need at least 2 trials");
    if (jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
    if (meso_exponent && !(*meso_exponent > 0.0 && *meso_exponent < 1.0))
        throw std::invalid_argument("config: mesoscopic exponent must lie in (0, 1)");
}

void for_each_trial(std::int64_t trials, unsigned jobs, const std::function<void(std::int64_t)>& body) {
    const auto workers = static_cast<std::int64_t>(std::max(1u, jobs));
    if (workers == 1 || trials < 2) {
        for (std::int64_t t = 0; t < trials; ++t) body(t);
        return;
    }
    const std::int64_t used = std::min(workers, trials);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(used));
    for (std::int64_t w = 0; w < used; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::int64_t t = w; t < trials; t += used) body(t);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

NormalityReport normality_report(const std::vector<std::int64_t>& counts, const CountMoments& moments) {
    if (!(moments.variance > 0.0)) throw std::domain_error("normality_report: zero reference variance");
    const double sd = std::sqrt(moments.variance);
    std::vector<double> z(counts.size());
    double raw_tail = 0.0, smooth_tail = 0.0;
    const double cut = moments.mean + 1.96 * sd;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double c = static_cast<double>(counts[i]);
        z[i] = (c - moments.mean) / sd;
        if (z[i] > 1.96) raw_tail += 1.0;
        // P(c + U - 1/2 > cut) for U uniform on [0, 1).
        smooth_tail += std::clamp(c + 0.5 - cut, 0.0, 1.0);
    }
    NormalityReport r;
    const MeanVar mv = sample_moments(z);
    r.sample_size = counts.size();
    r.empirical_mean = mv.mean;
    r.empirical_variance = mv.variance;
    r.tail_fraction_raw = raw_tail / counts.size();
    r.tail_fraction_smoothed = smooth_tail / counts.size();
    std::vector<std::int64_t> sorted_counts = counts;
    std::sort(sorted_counts.begin(), sorted_counts.end());
    const KsResult lattice = ks_test_lattice(sorted_counts, moments.mean, sd);
    r.ks_statistic = lattice.statistic;
    r.ks_p_value = lattice.p_value;
    std::sort(z.begin(), z.end());
    r.ks_continuous_p_value = ks_test(z, normal_cdf).p_value;
    return r;
}

CltResult run_clt_fixed(const ExperimentConfig& config) {
    config.validate();
    if (config.arcs.empty()) throw std::invalid_argument("run_clt_fixed: need at least one arc");
    const std::int64_t n = config.n_schedule.front();
    const std::size_t m = config.arcs.size();
    const EwensParams params(config.theta);

    CltResult res;
    res.n = n;
    for (const auto& a : config.arcs) {
        const CountMoments mom = config.model == Model::mod ? exact_moments_mod(n, config.theta, a.arc)
                                                            : exact_moments_perm(n, config.theta, a.arc);
        if (!(mom.variance > 1e-12))
            throw std::domain_error("run_clt_fixed: degenerate arc, the count has zero variance");
        res.moments.push_back(mom);
    }

    const auto trials = static_cast<std::size_t>(config.trials);
    res.counts.assign(m, std::vector<std::int64_t>(trials));
    for_each_trial(config.trials, config.jobs, [&](std::int64_t t) {
        Rng rng = trial_rng(config.master_seed, kStreamClt, static_cast<std::uint64_t>(t));
        const CycleCounts cc = sample_cycle_counts(n, params, rng);
        if (config.model == Model::mod) {
            const ModifiedSpectrum sp = attach_phases(cc, rng);
            for (std::size_t k = 0; k < m; ++k) res.counts[k][t] = count_arc_mod(sp, config.arcs[k].arc);
        } else {
            for (std::size_t k = 0; k < m; ++k) res.counts[k][t] = count_arc_perm(cc, config.arcs[k].arc);
        }
    });

    res.standardized.trials = trials;
    res.standardized.arcs = m;
    res.standardized.values.resize(trials * m);
    for (std::size_t k = 0; k < m; ++k) {
        const double sd = std::sqrt(res.moments[k].variance);
        for (std::size_t t = 0; t < trials; ++t)
            res.standardized.values[t * m + k] = (static_cast<double>(res.counts[k][t]) - res.moments[k].mean) / sd;
        res.reports.push_back(normality_report(res.counts[k], res.moments[k]));
    }

    // Pearson correlations of the standardized columns.
    std::vector<double> means(m), sds(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> col(trials);
        for (std::size_t t = 0; t < trials; ++t) col[t] = res.standardized(t, k);
        const MeanVar mv = sample_moments(col);
        means[k] = mv.mean;
        sds[k] = std::sqrt(mv.variance);
    }
    res.empirical_correlation.dim = m;
    res.empirical_correlation.entries.assign(m * m, 1.0);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t l = k + 1; l < m; ++l) {
            CompensatedSum s;
            for (std::size_t t = 0; t < trials; ++t)
                s += (res.standardized(t, k) - means[k]) * (res.standardized(t, l) - means[l]);
            const double c = s.value() / static_cast<double>(trials - 1) / (sds[k] * sds[l]);
            res.empirical_correlation.entries[k * m + l] = c;
            res.empirical_correlation.entries[l * m + k] = c;
        }
    }
    res.reference = config.model == Model::mod ? covariance_Dtilde(config.arcs, config.n_numeric)
                                               : covariance_D(config.arcs, config.n_numeric);
    return res;
}

MesoResult run_mesoscopic(const ExperimentConfig& config) {
    config.validate();
    if (!config.meso_exponent) throw std::invalid_argument("run_mesoscopic: the exponent gamma is required");
    if (config.arcs.empty()) throw std::invalid_argument("run_mesoscopic: need an arc giving alpha");
    const double gamma = *config.meso_exponent;
    const ClassifiedArc& base = config.arcs.front();
    const Endpoint alpha = base.arc.alpha;
    const EwensParams params(config.theta);

    double target = config.theta / 6.0;
    if (config.model == Model::perm) {
        const auto cls = alpha_class(base);
        if (!cls) throw std::invalid_argument("run_mesoscopic: perm model needs a declared class for alpha");
        target = config.theta * c2_meso(*cls);
    }

    MesoResult out;
    for (std::size_t r = 0; r < config.n_schedule.size(); ++r) {
        const std::int64_t n = config.n_schedule[r];
        MesoRow row;
        row.n = n;
        row.delta = std::pow(static_cast<double>(n), -gamma);
        row.log_n_delta = std::log(static_cast<double>(n) * row.delta);
        row.target_constant = target;
        const Arc arc = make_arc(alpha, Endpoint::real(alpha.value + row.delta));

        std::vector<std::int64_t> counts(static_cast<std::size_t>(config.trials));
        for_each_trial(config.trials, config.jobs, [&](std::int64_t t) {
            Rng rng = trial_rng(config.master_seed, kStreamMeso + r, static_cast<std::uint64_t>(t));
            const CycleCounts cc = sample_cycle_counts(n, params, rng);
            if (config.model == Model::mod)
                counts[t] = count_arc_mod(attach_phases(cc, rng), arc);
            else
                counts[t] = count_arc_perm(cc, arc);
        });

        CountMoments mom;
        if (config.model == Model::mod) {
            mom = exact_moments_mod(n, config.theta, arc);
        } else if (n <= kPermVarianceCap) {
            mom = exact_moments_perm(n, config.theta, arc);
        } else {
            mom.mean = exact_mean_perm(n, config.theta, arc);
            std::vector<double> xs(counts.begin(), counts.end());
            mom.variance = sample_moments(xs).variance;
            row.variance_exact = false;
        }
        row.variance = mom.variance;
        row.ratio = mom.variance / (target * row.log_n_delta);
        if (!out.rows.empty()) {
            const MesoRow& prev = out.rows.back();
            row.increment_ratio = (row.variance - prev.variance) / (target * (row.log_n_delta - prev.log_n_delta));
        }
        row.report = normality_report(counts, mom);
        out.rows.push_back(row);
    }
    return out;
}

double coupling_bound(double theta) { return 2.0 + theta * (kEulerGamma + digamma(theta)); }

double coupling_bound_finite(std::int64_t n, double theta) {
    CompensatedSum s;
    for (std::int64_t j = 1; j <= n; ++j) s += 1.0 / (static_cast<double>(j) * (theta + j - 1.0));
    return 2.0 + theta * (theta - 1.0) * s.value();
}

CouplingResult run_coupling_check(std::int64_t n, double theta, std::int64_t trials, std::uint64_t seed,
                                  double epsilon_tail, unsigned jobs) {
    if (trials < 2) throw std::invalid_argument("run_coupling_check: need at least 2 trials");
    const EwensParams params(theta);
    CouplingResult r;
    r.n = n;
    r.theta = theta;
    r.trials = trials;
    r.horizon = coupling_horizon(n, theta, epsilon_tail);
    r.tail_bound = coupling_tail_expectation(n, theta, r.horizon);
    std::vector<double> dist(static_cast<std::size_t>(trials));
    for_each_trial(trials, jobs, [&](std::int64_t t) {
        Rng rng = trial_rng(seed, kStreamCoupling, static_cast<std::uint64_t>(t));
        const CoupledSample s = sample_coupled_with_horizon(n, params, rng, r.horizon, r.tail_bound);
        std::int64_t d = 0;
        for (std::int64_t j = 1; j <= n; ++j)
            d += std::llabs(s.cycle_counts.multiplicity(j) - s.poisson_counts[static_cast<std::size_t>(j - 1)]);
        dist[static_cast<std::size_t>(t)] = static_cast<double>(d);
    });
    const MeanVar mv = sample_moments(dist);
    r.empirical_mean_distance = mv.mean;
    r.std_error = std::sqrt(mv.variance / static_cast<double>(trials));
    r.bound = coupling_bound(theta);
    r.finite_n_bound = coupling_bound_finite(n, theta);
    return r;
}

QuantileSummary quantiles(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return {quantile_sorted(values, 0.05), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5),
            quantile_sorted(values, 0.75), quantile_sorted(values, 0.95)};
}

SpacingsResult run_spacings(const std::vector<std::int64_t>& n_schedule, double theta, std::int64_t trials,
                            std::uint64_t seed, unsigned jobs) {
    if (n_schedule.empty()) throw std::invalid_argument("run_spacings: empty schedule");
    if (trials < 2) throw std::invalid_argument("run_spacings: need at least 2 trials");
    const EwensParams params(theta);
    constexpr double tol = 1e-12;
    SpacingsResult out;
    for (std::size_t r = 0; r < n_schedule.size(); ++r) {
        const std::int64_t n = n_schedule[r];
        if (n < 1) throw std::invalid_argument("run_spacings: n must be positive");
        const auto m = static_cast<std::size_t>(trials);
        std::vector<double> nD(m), n2d(m), nDm(m), n2dm(m);
        std::vector<std::uint8_t> v1(m), v2(m), v3(m), v4(m), v5(m);
        const double nn = static_cast<double>(n);
        for_each_trial(trials, jobs, [&](std::int64_t t) {
            Rng rng = trial_rng(seed, kStreamSpacings + r, static_cast<std::uint64_t>(t));
            const AgeOrderedCycles age = sample_age_ordered(n, params, rng);
            const CycleCounts cc = cycle_counts_from_lengths(n, age.lengths);
            const std::int64_t lcm = max_pairwise_lcm(cc);
            const Fraction big = max_gap_enumerated(cc);
            const ModifiedSpectrum sp = attach_phases(cc, rng);
            const SpacingStats ms = spacings_mod(sp);
            nD[t] = nn * static_cast<double>(big.numerator()) / static_cast<double>(big.denominator());
            n2d[t] = nn * nn / static_cast<double>(lcm);
            nDm[t] = nn * ms.largest;
            n2dm[t] = nn * nn * ms.smallest;
            v1[t] = static_cast<__int128>(n) * big.numerator() < big.denominator();
            v2[t] = static_cast<__int128>(n) * n < lcm;
            v3[t] = nn * ms.largest < 1.0 - tol;
            v4[t] = ms.largest > 1.0 / static_cast<double>(cc.counts().rbegin()->first) + tol;
            v5[t] = ms.smallest > 1.0 / static_cast<double>(lcm) + tol;
        });
        SpacingRow row;
        row.n = n;
        row.trials = trials;
        row.nD = quantiles(nD);
        row.n2d = quantiles(n2d);
        row.nD_mod = quantiles(nDm);
        row.n2d_mod = quantiles(n2dm);
        for (std::size_t t = 0; t < m; ++t) {
            row.nD_below_one += v1[t];
            row.n2d_below_one += v2[t];
            row.nD_mod_below_one += v3[t];
            row.mod_above_cycle_bound += v4[t];
            row.mod_d_above_perm_d += v5[t];
        }
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace permspec
