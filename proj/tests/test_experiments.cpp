#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "permspec/experiments.hpp"
#include "permspec/limits.hpp"
#include "permspec/stats.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

using namespace permspec;

namespace {

const double kPhi = constants::golden - 1.0;

ExperimentConfig base_config() {
    ExperimentConfig c;
    c.n_schedule = {2000};
    c.theta = 1.0;
    c.arcs = {{make_arc(0.0, kPhi), RationalAlpha{0, 1, kPhi}, Irrational{kPhi}}};
    c.trials = 500;
    c.master_seed = 12345;
    c.model = Model::mod;
    return c;
}

}  // namespace

TEST_CASE("model names") {
    CHECK(to_string(Model::perm) == "perm");
    CHECK(model_from_string("mod") == Model::mod);
    CHECK(model_from_string(to_string(Model::perm)) == Model::perm);
    CHECK_THROWS(model_from_string("wreath"));
}

TEST_CASE("config validation") {
    auto c = base_config();
    CHECK_NOTHROW(c.validate());
    c.trials = 1;
    CHECK_THROWS(c.validate());
    c = base_config();
    c.n_schedule.clear();
    CHECK_THROWS(c.validate());
    c = base_config();
    c.theta = 0.0;
    CHECK_THROWS(c.validate());
    for (double g : {0.0, 1.0, -0.5, 1.5}) {
        c = base_config();
        c.meso_exponent = g;
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
        CHECK_THROWS_AS(run_mesoscopic(c), std::invalid_argument);
    }
    c = base_config();
    CHECK_THROWS(run_mesoscopic(c));  // no exponent
}

TEST_CASE("trial loop") {
    for (unsigned jobs : {1u, 3u, 8u}) {
        std::vector<std::atomic<int>> hits(1001);
        for_each_trial(1001, jobs, [&](std::int64_t t) { hits[t]++; });
        bool all_once = true;
        for (auto& h : hits) all_once = all_once && h == 1;
        CHECK(all_once);
        CHECK_THROWS_AS(for_each_trial(100, jobs, [](std::int64_t t) {
                            if (t == 57) throw std::runtime_error("boom");
                        }),
                        std::runtime_error);
    }
}

TEST_CASE("degenerate arcs are rejected") {
    auto c = base_config();
    c.arcs = {{make_arc(0.3, 1.3), std::nullopt, std::nullopt}};
    CHECK_THROWS_AS(run_clt_fixed(c), std::domain_error);
    c.model = Model::perm;
    CHECK_THROWS_AS(run_clt_fixed(c), std::domain_error);
}

TEST_CASE("clt results do not depend on the thread count") {
    for (Model m : {Model::mod, Model::perm}) {
        auto c = base_config();
        c.model = m;
        c.arcs.push_back({make_arc(constants::sqrt2 - 1.0, constants::e - 2.0 + 0.5), std::nullopt, std::nullopt});
        c.n_numeric = 100000;
        c.jobs = 1;
        const auto a = run_clt_fixed(c);
        c.jobs = 5;
        const auto b = run_clt_fixed(c);
        CHECK(a.standardized.values == b.standardized.values);
        CHECK(a.counts == b.counts);
        CHECK(a.empirical_correlation.entries == b.empirical_correlation.entries);
        REQUIRE(a.reference.has_value());
        CHECK(a.reference->entries == b.reference->entries);
        c.master_seed += 1;
        CHECK(run_clt_fixed(c).counts != a.counts);
    }
}

TEST_CASE("standardization") {
    for (Model m : {Model::mod, Model::perm}) {
        auto c = base_config();
        c.model = m;
        c.trials = 2000;
        c.jobs = 4;
        const auto r = run_clt_fixed(c);
        REQUIRE(r.reports.size() == 1);
        const auto& rep = r.reports[0];
        const double M = static_cast<double>(c.trials);
        CHECK(std::abs(rep.empirical_mean) < 4.0 / std::sqrt(M));
        CHECK(std::abs(rep.empirical_variance - 1.0) < 4.0 * std::sqrt(2.0 / M));
        CHECK(rep.ks_statistic >= 0.0);
        CHECK(rep.ks_statistic <= 1.0);
        CHECK(rep.ks_p_value >= 0.0);
        CHECK(rep.ks_p_value <= 1.0);
        CHECK(rep.sample_size == 2000);
        REQUIRE(r.reference.has_value());
        CHECK((*r.reference)(0, 0) == 1.0);
    }
}

TEST_CASE("normality report on known moments") {
    // Binomial(400, 1/2) counts: the lattice KS should accept the normal law.
    Rng rng(6);
    std::vector<std::int64_t> counts(4000);
    for (auto& c : counts) {
        std::int64_t s = 0;
        for (int i = 0; i < 400; ++i) s += (rng() >> 63);
        c = s;
    }
    const auto rep = normality_report(counts, {200.0, 100.0});
    CHECK(rep.ks_p_value > 0.01);
    CHECK(rep.tail_fraction_smoothed == doctest::Approx(0.025).epsilon(0.4));
    CHECK(rep.reference_mean == 0.0);
    CHECK(rep.reference_variance == 1.0);
    // Wrong moments are detected.
    CHECK(normality_report(counts, {203.0, 100.0}).ks_p_value < 0.01);
}

TEST_CASE("mesoscopic harness") {
    auto c = base_config();
    c.meso_exponent = 0.5;
    c.n_schedule = {1000, 4000};
    c.trials = 400;
    const auto mod = run_mesoscopic(c);
    REQUIRE(mod.rows.size() == 2);
    CHECK(mod.rows[0].target_constant == doctest::Approx(1.0 / 6.0));
    CHECK(mod.rows[0].variance_exact);
    CHECK(!mod.rows[0].increment_ratio.has_value());
    CHECK(mod.rows[1].increment_ratio.has_value());
    CHECK(mod.rows[1].delta == doctest::Approx(1.0 / std::sqrt(4000.0)));
    CHECK(mod.rows[1].log_n_delta == doctest::Approx(0.5 * std::log(4000.0)));

    c.model = Model::perm;
    c.theta = 2.0;
    const auto perm = run_mesoscopic(c);
    CHECK(perm.rows[0].target_constant == doctest::Approx(2.0 / 3.0));

    c.arcs = {{make_arc(Endpoint::rational(1, 2), Endpoint::real(0.9)), std::nullopt, std::nullopt}};
    CHECK(run_mesoscopic(c).rows[0].target_constant == doctest::Approx(2.0 * 5.0 / 24.0));
    // A float endpoint is never taken to be rational.
    c.arcs = {{make_arc(0.5, 0.9), std::nullopt, std::nullopt}};
    CHECK_THROWS(run_mesoscopic(c));
    c.arcs = {{make_arc(kPhi, 0.9), std::nullopt, std::nullopt}};
    CHECK_THROWS(run_mesoscopic(c));  // float alpha with no declared class

    c.n_schedule = {kPermVarianceCap + 1};
    c.arcs = {{make_arc(Endpoint::rational(0, 1), Endpoint::real(0.5)), std::nullopt, std::nullopt}};
    c.jobs = 4;
    const auto big = run_mesoscopic(c);
    CHECK(!big.rows[0].variance_exact);
    c.jobs = 1;
    CHECK(run_mesoscopic(c).rows[0].variance == big.rows[0].variance);
}

TEST_CASE("coupling bound") {
    CHECK(coupling_bound(1.0) == doctest::Approx(2.0).epsilon(1e-12));
    double prev = coupling_bound(0.1);
    for (int i = 1; i <= 490; ++i) {
        const double th = 0.1 + 0.01 * i;
        const double b = coupling_bound(th);
        REQUIRE(b > prev);
        prev = b;
    }
    CHECK(coupling_bound_finite(1000000, 2.0) == doctest::Approx(coupling_bound(2.0)).epsilon(1e-5));
    CHECK(coupling_bound_finite(10, 1.0) == 2.0);
}

TEST_CASE("coupling check") {
    const auto small = run_coupling_check(1000, 0.01, 2000, 1, 1e-5, 4);
    CHECK(small.empirical_mean_distance <= 1.1);
    const auto r = run_coupling_check(1000, 2.0, 10000, 2, 1e-5, 4);
    CHECK(r.empirical_mean_distance <= r.bound + 3.0 * r.std_error);
    CHECK(r.bound == doctest::Approx(coupling_bound(2.0)));
    CHECK(r.tail_bound <= 1e-5);
    CHECK(run_coupling_check(1000, 2.0, 500, 2, 1e-5, 1).empirical_mean_distance ==
          run_coupling_check(1000, 2.0, 500, 2, 1e-5, 3).empirical_mean_distance);
}

TEST_CASE("spacings harness") {
    const auto res = run_spacings({200, 800}, 1.0, 300, 77, 4);
    REQUIRE(res.rows.size() == 2);
    for (const auto& row : res.rows) {
        CHECK(row.nD_below_one == 0);
        CHECK(row.n2d_below_one == 0);
        CHECK(row.nD_mod_below_one == 0);
        CHECK(row.mod_above_cycle_bound == 0);
        CHECK(row.mod_d_above_perm_d == 0);
        CHECK(row.nD.q05 >= 1.0);
        CHECK(row.nD.q05 <= row.nD.q50);
        CHECK(row.nD.q50 <= row.nD.q95);
        CHECK(row.n2d_mod.q50 <= row.n2d.q50);
    }
    const auto again = run_spacings({200, 800}, 1.0, 300, 77, 1);
    CHECK(again.rows[1].n2d.q50 == res.rows[1].n2d.q50);
    CHECK(again.rows[1].nD_mod.q95 == res.rows[1].nD_mod.q95);
}

TEST_CASE("quantiles") {
    const auto q = quantiles({5, 1, 4, 2, 3});
    CHECK(q.q05 == doctest::Approx(1.2));
    CHECK(q.q50 == 3.0);
    CHECK(q.q95 == doctest::Approx(4.8));
}

TEST_CASE("normal tail share at n = 1e4") {
    auto c = base_config();
    c.n_schedule = {10000};
    c.trials = 2000;
    const auto rep = run_clt_fixed(c).reports[0];
    CHECK(rep.tail_fraction_smoothed >= 0.015);
    CHECK(rep.tail_fraction_smoothed <= 0.035);
}
