#pragma once

#include "permspec/ewens.hpp"
#include "permspec/limits.hpp"
#include "permspec/spectral.hpp"
#include "permspec/stats.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace permspec {

enum class Model { perm, mod };

std::string to_string(Model m);
Model model_from_string(const std::string& s);

struct ExperimentConfig {
    std::vector<std::int64_t> n_schedule;
    double theta = 1.0;
    std::vector<ClassifiedArc> arcs;
    std::int64_t trials = 2000;
    std::uint64_t master_seed = 0;
    Model model = Model::mod;
    std::optional<double> meso_exponent;  // delta_N = N^{-gamma}
    unsigned jobs = 1;
    std::int64_t n_numeric = kNumericLimitN;

    // Throws std::invalid_argument on M < 2, empty schedule, bad gamma, etc.
    void validate() const;
};

// Runs body(t) for t in [0, trials) on `jobs` threads. Each trial must write
// only to its own slot; results are then independent of the thread count.
void for_each_trial(std::int64_t trials, unsigned jobs, const std::function<void(std::int64_t)>& body);

struct NormalityReport {
    std::size_t sample_size = 0;
    double ks_statistic = 0.0;
    double ks_p_value = 1.0;
    double empirical_mean = 0.0;
    double empirical_variance = 0.0;
    double reference_mean = 0.0;
    double reference_variance = 1.0;
    // Plain KS of the standardized integers against the continuous normal;
    // reported for comparison only, it is dominated by the lattice steps.
    double ks_continuous_p_value = 1.0;
    // Share of standardized counts above 1.96: raw, and with the integer
    // lattice smoothed by a uniform jitter, integrated out exactly.
    double tail_fraction_raw = 0.0;
    double tail_fraction_smoothed = 0.0;
};

// Standardizes integer counts with the given moments and tests them.
NormalityReport normality_report(const std::vector<std::int64_t>& counts, const CountMoments& moments);

struct TrialMatrix {
    std::size_t trials = 0;
    std::size_t arcs = 0;
    std::vector<double> values;  // row-major, trial x arc

    double operator()(std::size_t t, std::size_t k) const { return values[t * arcs + k]; }
};

struct CltResult {
    std::int64_t n = 0;
    std::vector<CountMoments> moments;
    TrialMatrix standardized;
    std::vector<std::vector<std::int64_t>> counts;  // per arc, in trial order
    std::vector<NormalityReport> reports;
    CovarianceMatrix empirical_correlation;
    std::optional<CovarianceMatrix> reference;  // D or D tilde
};

// Uses n_schedule.front(). Standardizes with exact finite-n moments.
CltResult run_clt_fixed(const ExperimentConfig& config);

struct MesoRow {
    std::int64_t n = 0;
    double delta = 0.0;
    double log_n_delta = 0.0;
    double variance = 0.0;
    bool variance_exact = true;
    double target_constant = 0.0;  // theta times 1/6 or c2(alpha)
    double ratio = 0.0;            // variance / (target_constant log(n delta))
    // (Var_i - Var_{i-1}) / (target_constant (log(n_i delta_i) - log(n_{i-1} delta_{i-1}))),
    // absent on the first row.
    std::optional<double> increment_ratio;
    NormalityReport report;
};

struct MesoResult {
    std::vector<MesoRow> rows;
};

// The arc is (alpha, alpha + N^{-gamma}] with alpha from config.arcs.front().
// Mod rows use the exact variance; perm rows use it up to the variance cap and
// the Monte Carlo variance beyond. Each row carries a KS report over `trials`.
MesoResult run_mesoscopic(const ExperimentConfig& config);

// 2 + theta (gamma + psi(theta)).
double coupling_bound(double theta);

// 2 + theta (theta - 1) sum_{j<=n} 1/(j (theta + j - 1)).
double coupling_bound_finite(std::int64_t n, double theta);

struct CouplingResult {
    std::int64_t n = 0;
    double theta = 1.0;
    std::int64_t trials = 0;
    std::int64_t horizon = 0;
    double tail_bound = 0.0;
    double empirical_mean_distance = 0.0;
    double std_error = 0.0;
    double bound = 0.0;
    double finite_n_bound = 0.0;
};

CouplingResult run_coupling_check(std::int64_t n, double theta, std::int64_t trials, std::uint64_t seed,
                                  double epsilon_tail = 1e-5, unsigned jobs = 1);

struct QuantileSummary {
    double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
};

QuantileSummary quantiles(std::vector<double> values);

struct SpacingRow {
    std::int64_t n = 0;
    std::int64_t trials = 0;
    QuantileSummary nD, n2d, nD_mod, n2d_mod;
    // Samplewise bound violations.
    std::int64_t nD_below_one = 0;        // exact
    std::int64_t n2d_below_one = 0;       // exact
    std::int64_t nD_mod_below_one = 0;    // to 1e-12
    std::int64_t mod_above_cycle_bound = 0;  // D tilde > 1/L_{n,1}, to 1e-12
    std::int64_t mod_d_above_perm_d = 0;  // d tilde > d, to 1e-12
};

struct SpacingsResult {
    std::vector<SpacingRow> rows;
};

// Per trial: age-ordered sample, the shared cycle type, phases attached.
SpacingsResult run_spacings(const std::vector<std::int64_t>& n_schedule, double theta, std::int64_t trials,
                            std::uint64_t seed, unsigned jobs = 1);

}  // namespace permspec
