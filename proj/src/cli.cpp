#include "permspec/cli.hpp"

#include "permspec/cesaro.hpp"
#include "permspec/experiments.hpp"
#include "permspec/spacings.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <regex>
#include <stdexcept>

namespace permspec {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::int64_t parse_int(const std::string& s) {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad integer: " + s);
    return v;
}

Fraction parse_fraction(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Fraction(parse_int(s));
    const std::int64_t den = parse_int(s.substr(slash + 1));
    if (den <= 0) throw std::invalid_argument("denominator must be positive: " + s);
    return Fraction(parse_int(s.substr(0, slash)), den);
}

}  // namespace

EndpointToken parse_endpoint_token(const std::string& text, const EndpointToken* alpha) {
    EndpointToken t;
    t.text = text;
    static const std::regex decimal(R"(^(-?)(\d{1,9})(?:\.(\d{1,9}))?$)");
    static const std::regex affine(R"(^affine:(-?\d+)/(\d+)\+(-?\d+)/(\d+)\*alpha$)");
    std::smatch m;
    if (text.rfind("rat:", 0) == 0) {
        t.kind = EndpointToken::Kind::rational;
        t.endpoint = Endpoint::rational(parse_fraction(text.substr(4)));
    } else if (text.rfind("irr:", 0) == 0) {
        const std::string name = text.substr(4);
        double v;
        if (name == "golden")
            v = constants::golden - 1.0;
        else if (name == "sqrt2")
            v = constants::sqrt2 - 1.0;
        else if (name == "sqrt3")
            v = constants::sqrt3 - 1.0;
        else if (name == "e")
            v = constants::e - 2.0;
        else
            throw std::invalid_argument("unknown irrational constant: " + name);
        t.kind = EndpointToken::Kind::irrational;
        t.irrational_name = name;
        t.endpoint = Endpoint::real(v);
    } else if (std::regex_match(text, m, affine)) {
        if (alpha == nullptr || alpha->kind != EndpointToken::Kind::irrational)
            throw std::invalid_argument("affine endpoint needs an irr: alpha");
        t.kind = EndpointToken::Kind::affine;
        t.p = parse_int(m[1]);
        t.q = parse_int(m[2]);
        t.r = parse_int(m[3]);
        t.s = parse_int(m[4]);
        if (t.q <= 0 || t.s <= 0) throw std::invalid_argument("affine denominators must be positive");
        t.endpoint = Endpoint::real(static_cast<double>(t.p) / t.q +
                                    static_cast<double>(t.r) / t.s * alpha->endpoint.value);
    } else if (std::regex_match(text, m, decimal)) {
        // A finite decimal is a rational number; keep it exact.
        const std::string frac_digits = m[3].matched ? std::string(m[3]) : std::string();
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac_digits.size(); ++i) den *= 10;
        std::int64_t num = parse_int(m[2]) * den + (frac_digits.empty() ? 0 : parse_int(frac_digits));
        if (m[1].length() > 0) num = -num;
        t.kind = EndpointToken::Kind::rational;
        t.endpoint = Endpoint::rational(Fraction(num, den));
    } else {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size() || !std::isfinite(v)) throw std::invalid_argument("bad endpoint: " + text);
        t.endpoint = Endpoint::real(v);
    }
    return t;
}

std::optional<ArcClass> classify(const EndpointToken& a, const EndpointToken& b) {
    using K = EndpointToken::Kind;
    if (a.kind == K::irrational && b.kind == K::irrational) {
        if (a.irrational_name == b.irrational_name) return std::nullopt;
        return BothIrrationalIndependent{a.endpoint.value, b.endpoint.value};
    }
    if (a.kind == K::rational && b.kind == K::irrational)
        return RationalAlpha{a.endpoint.exact->numerator(), a.endpoint.exact->denominator(), b.endpoint.value};
    if (a.kind == K::irrational && b.kind == K::rational)
        return RationalBeta{a.endpoint.value, b.endpoint.exact->numerator(), b.endpoint.exact->denominator()};
    if (a.kind == K::rational && b.kind == K::rational)
        return BothRational{a.endpoint.exact->numerator(), a.endpoint.exact->denominator(),
                            b.endpoint.exact->numerator(), b.endpoint.exact->denominator()};
    if (a.kind == K::irrational && b.kind == K::affine) {
        const Fraction pq(b.p, b.q), rs(b.r, b.s);
        if (rs.numerator() == 0) return std::nullopt;
        return AffineRelated{pq.numerator(), pq.denominator(), rs.numerator(), rs.denominator(), a.endpoint.value};
    }
    return std::nullopt;
}

std::optional<RealClass> classify_width(const EndpointToken& a, const EndpointToken& b) {
    using K = EndpointToken::Kind;
    if (a.kind == K::rational && b.kind == K::rational) return RealClass{*b.endpoint.exact - *a.endpoint.exact};
    const double w = b.endpoint.value - a.endpoint.value;
    if ((a.kind == K::rational && b.kind == K::irrational) || (a.kind == K::irrational && b.kind == K::rational))
        return RealClass{Irrational{w}};
    if (a.kind == K::irrational && b.kind == K::irrational && a.irrational_name != b.irrational_name)
        return RealClass{Irrational{w}};
    if (a.kind == K::irrational && b.kind == K::affine) {
        if (Fraction(b.r, b.s) == Fraction(1)) return RealClass{Fraction(b.p, b.q)};
        return RealClass{Irrational{w}};
    }
    return std::nullopt;
}

std::string class_name(const ArcClass& cls) {
    static const char* names[] = {"both-irrational-independent", "rational-alpha", "rational-beta", "both-rational",
                                  "affine"};
    return names[cls.index()];
}

namespace {

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

struct Output {
    json config = json::object();
    json results = json::object();
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Options {
    std::int64_t n = 0;
    std::string n_list;
    double theta = 1.0;
    std::string alpha;
    std::string beta;
    std::string arcs;
    std::string model = "mod";
    std::int64_t trials = 2000;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::string format = "json";
    double gamma = 0.5;
    double epsilon_tail = 1e-5;
    std::string case_name;
};

struct ArcSpec {
    EndpointToken alpha;
    EndpointToken beta;
    ClassifiedArc arc;
};

ArcSpec make_arc_spec(const std::string& a, const std::string& b, bool validate_arc = true) {
    ArcSpec s;
    try {
        s.alpha = parse_endpoint_token(a);
        s.beta = parse_endpoint_token(b, &s.alpha);
        if (s.alpha.kind == EndpointToken::Kind::affine) throw std::invalid_argument("alpha cannot be affine");
        if (validate_arc) s.arc.arc = make_arc(s.alpha.endpoint, s.beta.endpoint);
        s.arc.cls = classify(s.alpha, s.beta);
        s.arc.width_class = classify_width(s.alpha, s.beta);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    return s;
}

std::vector<ArcSpec> parse_arcs(const Options& o, const std::string& default_alpha, const std::string& default_beta) {
    std::vector<ArcSpec> out;
    if (!o.arcs.empty()) {
        std::stringstream ss(o.arcs);
        std::string pair;
        while (std::getline(ss, pair, ';')) {
            const auto comma = pair.find(',');
            if (comma == std::string::npos) throw UsageError("--arcs entries must be alpha,beta pairs");
            out.push_back(make_arc_spec(pair.substr(0, comma), pair.substr(comma + 1)));
        }
        if (out.empty()) throw UsageError("--arcs is empty");
        return out;
    }
    out.push_back(make_arc_spec(o.alpha.empty() ? default_alpha : o.alpha, o.beta.empty() ? default_beta : o.beta));
    return out;
}

std::vector<std::int64_t> parse_n_list(const std::string& s) {
    std::vector<std::int64_t> out;
    std::stringstream ss(s);
    std::string item;
    try {
        while (std::getline(ss, item, ',')) out.push_back(parse_int(item));
    } catch (const std::exception&) {
        throw UsageError("--n-list must be comma-separated integers");
    }
    if (out.empty()) throw UsageError("--n-list is empty");
    for (auto n : out)
        if (n < 1) throw UsageError("--n-list entries must be positive");
    return out;
}

json arc_echo(const ArcSpec& a) {
    json j = {{"alpha", a.alpha.text}, {"beta", a.beta.text},
              {"alpha_value", a.alpha.endpoint.value}, {"beta_value", a.beta.endpoint.value}};
    j["class"] = a.arc.cls ? json(class_name(*a.arc.cls)) : json(nullptr);
    return j;
}

json report_json(const NormalityReport& r) {
    return {{"sample_size", r.sample_size},
            {"ks_statistic", r.ks_statistic},
            {"ks_p_value", r.ks_p_value},
            {"ks_continuous_p_value", r.ks_continuous_p_value},
            {"empirical_mean", r.empirical_mean},
            {"empirical_variance", r.empirical_variance},
            {"reference_mean", r.reference_mean},
            {"reference_variance", r.reference_variance},
            {"tail_fraction_raw", r.tail_fraction_raw},
            {"tail_fraction_smoothed", r.tail_fraction_smoothed}};
}

json matrix_json(const CovarianceMatrix& c) {
    json rows = json::array();
    for (std::size_t k = 0; k < c.dim; ++k) {
        json row = json::array();
        for (std::size_t l = 0; l < c.dim; ++l) row.push_back(c(k, l));
        rows.push_back(row);
    }
    return rows;
}

json quantiles_json(const QuantileSummary& q) {
    return {{"q05", q.q05}, {"q25", q.q25}, {"q50", q.q50}, {"q75", q.q75}, {"q95", q.q95}};
}

Model parse_model(const std::string& s) {
    try {
        return model_from_string(s);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

void require_positive(std::int64_t v, const char* flag) {
    if (v < 1) throw UsageError(std::string(flag) + " must be positive");
}

// ---- commands -------------------------------------------------------------

void cmd_sample(const Options& o, Output& out) {
    require_positive(o.n, "--n");
    require_positive(o.trials, "--trials");
    const Model model = parse_model(o.model);
    const EwensParams params(o.theta);
    out.config = {{"n", o.n}, {"theta", o.theta}, {"model", o.model}, {"trials", o.trials},
                  {"seed", o.seed}, {"jobs", o.jobs}};
    std::vector<CycleCounts> counts(static_cast<std::size_t>(o.trials));
    std::vector<ModifiedSpectrum> spectra(static_cast<std::size_t>(o.trials));
    for_each_trial(o.trials, o.jobs, [&](std::int64_t t) {
        Rng rng = trial_rng(o.seed, 0, static_cast<std::uint64_t>(t));
        counts[t] = sample_cycle_counts(o.n, params, rng);
        if (model == Model::mod) spectra[t] = attach_phases(counts[t], rng);
    });
    json samples = json::array();
    if (model == Model::perm) out.header = {"trial", "length", "multiplicity"};
    else out.header = {"trial", "length", "phase"};
    for (std::size_t t = 0; t < counts.size(); ++t) {
        json s = {{"trial", t}};
        json cyc = json::array();
        for (const auto& [j, a] : counts[t].counts()) {
            cyc.push_back({j, a});
            if (model == Model::perm) out.rows.push_back({std::to_string(t), std::to_string(j), std::to_string(a)});
        }
        s["cycle_counts"] = cyc;
        if (model == Model::mod) {
            json ph = json::array();
            for (const auto& c : spectra[t].cycles) {
                ph.push_back({c.length, c.phase});
                out.rows.push_back({std::to_string(t), std::to_string(c.length), fmt17(c.phase)});
            }
            s["phases"] = ph;
        }
        samples.push_back(s);
    }
    out.results["samples"] = samples;
}

void cmd_exact_moments(const Options& o, Output& out) {
    require_positive(o.n, "--n");
    const Model model = parse_model(o.model);
    const auto arcs = parse_arcs(o, "0", "0.5");
    out.config = {{"n", o.n}, {"theta", o.theta}, {"model", o.model}};
    out.config["arcs"] = json::array();
    out.header = {"arc", "alpha", "beta", "mean", "variance"};
    json list = json::array();
    for (std::size_t k = 0; k < arcs.size(); ++k) {
        out.config["arcs"].push_back(arc_echo(arcs[k]));
        const CountMoments m = model == Model::mod ? exact_moments_mod(o.n, o.theta, arcs[k].arc.arc)
                                                   : exact_moments_perm(o.n, o.theta, arcs[k].arc.arc);
        list.push_back({{"arc", k}, {"mean", m.mean}, {"variance", m.variance}});
        out.rows.push_back({std::to_string(k), arcs[k].alpha.text, arcs[k].beta.text, fmt17(m.mean), fmt17(m.variance)});
    }
    out.results["moments"] = list;
}

void cmd_constants(const Options& o, Output& out) {
    static const std::map<std::string, std::pair<std::string, std::string>> defaults = {
        {"both-irrational-independent", {"irr:sqrt2", "irr:golden"}},
        {"rational-alpha", {"rat:1/2", "irr:golden"}},
        {"rational-beta", {"irr:sqrt2", "rat:1/2"}},
        {"both-rational", {"rat:1/3", "rat:1/2"}},
        {"affine", {"irr:sqrt2", "affine:1/2+1/2*alpha"}},
    };
    std::string a = o.alpha, b = o.beta;
    if (!o.case_name.empty()) {
        const auto it = defaults.find(o.case_name);
        if (it == defaults.end()) throw UsageError("unknown --case: " + o.case_name);
        if (a.empty()) a = it->second.first;
        if (b.empty()) b = it->second.second;
    }
    if (a.empty() || b.empty()) throw UsageError("constants needs --case or both --alpha and --beta");
    const ArcSpec spec = make_arc_spec(a, b, false);
    if (!spec.arc.cls) throw UsageError("endpoints do not declare an arithmetic class (use rat:, irr:, affine:)");
    const ArcClass& cls = *spec.arc.cls;
    if (!o.case_name.empty() && class_name(cls) != o.case_name)
        throw UsageError("endpoints are of class " + class_name(cls) + ", not " + o.case_name);
    try {
        validate(cls);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    const Endpoint al = class_alpha(cls), be = class_beta(cls);
    const bool periodic = al.exact && be.exact;
    std::int64_t n_used = o.n > 0 ? o.n : kNumericLimitN;
    if (periodic) n_used = std::lcm(al.exact->denominator(), be.exact->denominator());
    const RealClass alpha_cls = al.exact ? RealClass{*al.exact} : RealClass{Irrational{al.value}};
    const RealClass beta_cls = be.exact ? RealClass{*be.exact} : RealClass{Irrational{be.value}};

    out.config = {{"case", class_name(cls)}, {"alpha", spec.alpha.text}, {"beta", spec.beta.text},
                  {"alpha_value", al.value}, {"beta_value", be.value}, {"n_numeric", n_used},
                  {"periodic", periodic}};
    json closed = {{"c2", c2_closed(cls)},
                   {"s3", s3_closed(cls)},
                   {"second_moment_alpha", second_moment_closed(alpha_cls)},
                   {"second_moment_beta", second_moment_closed(beta_cls)},
                   {"c2_meso_alpha", c2_meso(alpha_cls)}};
    json numeric = {{"c2", c_numeric(al, be, al, be, n_used)},
                    {"s3", s3_numeric(al, be, n_used)},
                    {"second_moment_alpha", second_moment_numeric(al, n_used)},
                    {"second_moment_beta", second_moment_numeric(be, n_used)}};
    if (spec.arc.width_class) {
        closed["ell"] = ell_closed(*spec.arc.width_class);
        numeric["ell"] = ctilde_numeric(al, be, al, be, n_used);
    }
    out.results["closed_form"] = closed;
    out.results["numeric"] = numeric;
    out.header = {"quantity", "closed_form", "numeric", "abs_gap"};
    for (auto it = closed.begin(); it != closed.end(); ++it) {
        const double c = it.value().get<double>();
        if (numeric.contains(it.key())) {
            const double v = numeric[it.key()].get<double>();
            out.rows.push_back({it.key(), fmt17(c), fmt17(v), fmt17(std::abs(c - v))});
        } else {
            out.rows.push_back({it.key(), fmt17(c), "", ""});
        }
    }
}

ExperimentConfig experiment_config(const Options& o, std::vector<std::int64_t> schedule,
                                   const std::vector<ArcSpec>& arcs) {
    ExperimentConfig c;
    c.n_schedule = std::move(schedule);
    c.theta = o.theta;
    for (const auto& a : arcs) c.arcs.push_back(a.arc);
    c.trials = o.trials;
    c.master_seed = o.seed;
    c.model = parse_model(o.model);
    c.jobs = o.jobs;
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    return c;
}

void cmd_clt(const Options& o, Output& out) {
    require_positive(o.n, "--n");
    const auto arcs = parse_arcs(o, "0", "irr:golden");
    const ExperimentConfig cfg = experiment_config(o, {o.n}, arcs);
    out.config = {{"n", o.n}, {"theta", o.theta}, {"model", o.model}, {"trials", o.trials},
                  {"seed", o.seed}, {"jobs", o.jobs}, {"n_numeric", cfg.n_numeric}};
    out.config["arcs"] = json::array();
    for (const auto& a : arcs) out.config["arcs"].push_back(arc_echo(a));

    const CltResult r = run_clt_fixed(cfg);
    json per_arc = json::array();
    for (std::size_t k = 0; k < arcs.size(); ++k) {
        per_arc.push_back({{"arc", k},
                           {"mean", r.moments[k].mean},
                           {"variance", r.moments[k].variance},
                           {"report", report_json(r.reports[k])}});
    }
    out.results["arcs"] = per_arc;
    out.results["empirical_correlation"] = matrix_json(r.empirical_correlation);
    if (r.reference) {
        out.results["reference_covariance"] = matrix_json(*r.reference);
        out.results["reference_min_eigenvalue"] = r.reference->min_eigenvalue();
    }
    out.header = {"trial"};
    for (std::size_t k = 0; k < arcs.size(); ++k) {
        out.header.push_back("count_" + std::to_string(k));
        out.header.push_back("z_" + std::to_string(k));
    }
    for (std::size_t t = 0; t < r.standardized.trials; ++t) {
        std::vector<std::string> row{std::to_string(t)};
        for (std::size_t k = 0; k < arcs.size(); ++k) {
            row.push_back(std::to_string(r.counts[k][t]));
            row.push_back(fmt17(r.standardized(t, k)));
        }
        out.rows.push_back(row);
    }
}

void cmd_mesoscopic(const Options& o, Output& out) {
    const auto schedule = parse_n_list(o.n_list.empty() ? "10000,100000,1000000" : o.n_list);
    Options local = o;
    local.arcs.clear();
    const std::string alpha = o.alpha.empty() ? "0" : o.alpha;
    // Only alpha matters; the width is N^{-gamma}. A placeholder beta keeps the parser uniform.
    ArcSpec spec;
    try {
        spec.alpha = parse_endpoint_token(alpha);
        if (spec.alpha.kind == EndpointToken::Kind::affine) throw std::invalid_argument("alpha cannot be affine");
        const double av = spec.alpha.endpoint.value;
        if (!(av >= 0.0 && av < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
        spec.arc.arc = Arc{spec.alpha.endpoint, Endpoint::real(av + 0.5)};
        if (spec.alpha.kind == EndpointToken::Kind::irrational)
            spec.arc.cls = RationalBeta{av, 1, 1};  // only the alpha part is read
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    ExperimentConfig cfg = experiment_config(o, schedule, {spec});
    cfg.meso_exponent = o.gamma;
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    out.config = {{"n_list", schedule}, {"theta", o.theta}, {"model", o.model}, {"alpha", alpha},
                  {"alpha_value", spec.alpha.endpoint.value}, {"gamma", o.gamma}, {"trials", o.trials},
                  {"seed", o.seed}, {"jobs", o.jobs}};
    const MesoResult r = run_mesoscopic(cfg);
    json rows = json::array();
    out.header = {"n", "delta", "log_n_delta", "variance", "variance_exact", "target_constant", "ratio",
                  "increment_ratio", "ks_p_value", "empirical_mean", "empirical_variance"};
    for (const auto& row : r.rows) {
        rows.push_back({{"n", row.n},
                        {"delta", row.delta},
                        {"log_n_delta", row.log_n_delta},
                        {"variance", row.variance},
                        {"variance_exact", row.variance_exact},
                        {"target_constant", row.target_constant},
                        {"ratio", row.ratio},
                        {"increment_ratio", row.increment_ratio ? json(*row.increment_ratio) : json(nullptr)},
                        {"report", report_json(row.report)}});
        out.rows.push_back({std::to_string(row.n), fmt17(row.delta), fmt17(row.log_n_delta), fmt17(row.variance),
                            row.variance_exact ? "true" : "false", fmt17(row.target_constant), fmt17(row.ratio),
                            row.increment_ratio ? fmt17(*row.increment_ratio) : "",
                            fmt17(row.report.ks_p_value), fmt17(row.report.empirical_mean),
                            fmt17(row.report.empirical_variance)});
    }
    out.results["rows"] = rows;
}

void cmd_spacings(const Options& o, Output& out) {
    const auto schedule = parse_n_list(o.n_list.empty() ? "1000,4000,16000" : o.n_list);
    require_positive(o.trials, "--trials");
    if (o.trials < 2) throw UsageError("--trials must be at least 2");
    out.config = {{"n_list", schedule}, {"theta", o.theta}, {"trials", o.trials}, {"seed", o.seed}, {"jobs", o.jobs}};
    const SpacingsResult r = run_spacings(schedule, o.theta, o.trials, o.seed, o.jobs);
    json rows = json::array();
    out.header = {"n", "statistic", "q05", "q25", "q50", "q75", "q95"};
    for (const auto& row : r.rows) {
        rows.push_back({{"n", row.n},
                        {"nD", quantiles_json(row.nD)},
                        {"n2d", quantiles_json(row.n2d)},
                        {"nD_mod", quantiles_json(row.nD_mod)},
                        {"n2d_mod", quantiles_json(row.n2d_mod)},
                        {"violations",
                         {{"nD_below_one", row.nD_below_one},
                          {"n2d_below_one", row.n2d_below_one},
                          {"nD_mod_below_one", row.nD_mod_below_one},
                          {"mod_above_cycle_bound", row.mod_above_cycle_bound},
                          {"mod_d_above_perm_d", row.mod_d_above_perm_d}}}});
        const std::pair<const char*, const QuantileSummary*> stats[] = {
            {"nD", &row.nD}, {"n2d", &row.n2d}, {"nD_mod", &row.nD_mod}, {"n2d_mod", &row.n2d_mod}};
        for (const auto& [name, q] : stats)
            out.rows.push_back({std::to_string(row.n), name, fmt17(q->q05), fmt17(q->q25), fmt17(q->q50),
                                fmt17(q->q75), fmt17(q->q95)});
    }
    out.results["rows"] = rows;
}

void cmd_coupling(const Options& o, Output& out) {
    const std::int64_t n = o.n > 0 ? o.n : 1000;
    if (o.trials < 2) throw UsageError("--trials must be at least 2");
    if (!(o.theta > 0.0)) throw UsageError("--theta must be positive");
    if (!(o.epsilon_tail > 0.0)) throw UsageError("--epsilon-tail must be positive");
    out.config = {{"n", n}, {"theta", o.theta}, {"trials", o.trials}, {"seed", o.seed},
                  {"jobs", o.jobs}, {"epsilon_tail", o.epsilon_tail}};
    const CouplingResult r = run_coupling_check(n, o.theta, o.trials, o.seed, o.epsilon_tail, o.jobs);
    out.results = {{"empirical_mean_distance", r.empirical_mean_distance},
                   {"std_error", r.std_error},
                   {"tail_bound", r.tail_bound},
                   {"horizon", r.horizon},
                   {"bound", r.bound},
                   {"finite_n_bound", r.finite_n_bound},
                   {"within_bound", r.empirical_mean_distance + r.tail_bound <= r.bound + 3 * r.std_error}};
    out.header = {"n", "theta", "trials", "empirical_mean_distance", "std_error", "tail_bound", "horizon", "bound",
                  "finite_n_bound"};
    out.rows.push_back({std::to_string(n), fmt17(o.theta), std::to_string(o.trials),
                        fmt17(r.empirical_mean_distance), fmt17(r.std_error), fmt17(r.tail_bound),
                        std::to_string(r.horizon), fmt17(r.bound), fmt17(r.finite_n_bound)});
}

void cmd_identities(const Options& o, Output& out) {
    const std::int64_t n = o.n > 0 ? o.n : 500;
    if (!(o.theta > 0.0)) throw UsageError("--theta must be positive");
    out.config = {{"n", n}, {"theta", o.theta}};
    constexpr double single_tol = 1e-10, double_tol = 1e-8;
    json list = json::array();
    out.header = {"identity", "lhs", "rhs", "relative_gap", "tolerance", "pass"};
    auto add = [&](const std::string& name, const IdentityCheck& c, double tol, json extra = json::object()) {
        const double gap = c.relative_gap();
        json j = {{"identity", name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"relative_gap", gap},
                  {"tolerance", tol}, {"pass", gap < tol}};
        j.update(extra);
        list.push_back(j);
        out.rows.push_back({name, fmt17(c.lhs), fmt17(c.rhs), fmt17(gap), fmt17(tol), gap < tol ? "true" : "false"});
    };
    add("mean", verify_mean_identity(n, o.theta), single_tol);
    add("harmonic", verify_harmonic_identity(n, o.theta), single_tol);
    if (n <= kQuadraticCap) {
        add("quadratic", verify_quadratic_identity(n, o.theta), double_tol);
    } else {
        list.push_back({{"identity", "quadratic"}, {"skipped", "n exceeds the quadratic cap"}});
    }
    if (n >= 2) {
        // Worst j over all j (or a log-spaced grid beyond the cap).
        std::vector<std::int64_t> js;
        if (n <= kQuadraticCap) {
            for (std::int64_t j = 1; j < n; ++j) js.push_back(j);
        } else {
            for (double x = 1.0; x < static_cast<double>(n); x *= 1.2) {
                const auto j = static_cast<std::int64_t>(x);
                if (js.empty() || js.back() != j) js.push_back(j);
            }
            if (js.back() != n - 1) js.push_back(n - 1);
        }
        IdentityCheck worst;
        std::int64_t worst_j = js.front();
        double worst_gap = -1.0;
        for (auto j : js) {
            const IdentityCheck c = verify_telescoping(n, j, o.theta);
            if (c.relative_gap() > worst_gap) {
                worst_gap = c.relative_gap();
                worst = c;
                worst_j = j;
            }
        }
        add("telescoping", worst, double_tol, {{"worst_j", worst_j}, {"j_checked", js.size()}});
    }
    bool all = true;
    double max_gap = 0.0;
    for (const auto& j : list) {
        if (j.contains("pass")) {
            all = all && j["pass"].get<bool>();
            max_gap = std::max(max_gap, j["relative_gap"].get<double>());
        }
    }
    out.results = {{"identities", list}, {"all_pass", all}, {"max_relative_gap", max_gap}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Eigenvalue counting statistics of Ewens permutation matrices"};
    app.name("permspec");
    app.require_subcommand(1);
    Options o;

    auto add_theta = [&](CLI::App* s) { s->add_option("--theta", o.theta, "Ewens parameter (default 1)"); };
    auto add_format = [&](CLI::App* s) {
        s->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };
    auto add_model = [&](CLI::App* s) {
        s->add_option("--model", o.model, "perm or mod")->check(CLI::IsMember({"perm", "mod"}));
    };
    auto add_arcs = [&](CLI::App* s) {
        s->add_option("--alpha", o.alpha, "arc start token");
        s->add_option("--beta", o.beta, "arc end token");
        s->add_option("--arcs", o.arcs, "alpha,beta pairs separated by ';'");
    };
    std::vector<CLI::Option*> seed_opts;
    auto add_stochastic = [&](CLI::App* s) {
        s->add_option("--trials", o.trials, "Monte Carlo trials (default 2000)");
        seed_opts.push_back(s->add_option("--seed", o.seed, "master seed")->required());
        s->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    };

    auto* sample = app.add_subcommand("sample", "sample cycle structures (and phases for mod)");
    sample->add_option("--n", o.n, "permutation size")->required();
    add_theta(sample);
    add_model(sample);
    add_stochastic(sample);
    add_format(sample);

    auto* moments = app.add_subcommand("exact-moments", "exact finite-n mean and variance of arc counts");
    moments->add_option("--n", o.n, "permutation size")->required();
    add_theta(moments);
    add_arcs(moments);
    add_model(moments);
    add_format(moments);

    auto* consts = app.add_subcommand("constants", "closed-form limiting constants against numeric averages");
    consts->add_option("--case", o.case_name,
                       "both-irrational-independent | rational-alpha | rational-beta | both-rational | affine");
    consts->add_option("--alpha", o.alpha, "alpha token");
    consts->add_option("--beta", o.beta, "beta token");
    consts->add_option("--n", o.n, "averaging length for irrational cases (default 1000000)");
    add_format(consts);

    auto* clt = app.add_subcommand("clt", "fixed-arc central limit experiment");
    clt->add_option("--n", o.n, "permutation size")->required();
    add_theta(clt);
    add_arcs(clt);
    add_model(clt);
    add_stochastic(clt);
    add_format(clt);

    auto* meso = app.add_subcommand("mesoscopic", "variance ratios and normality on shrinking arcs");
    meso->add_option("--n-list", o.n_list, "comma-separated sizes (default 10000,100000,1000000)");
    meso->add_option("--gamma", o.gamma, "width exponent, delta_N = N^-gamma (default 0.5)");
    meso->add_option("--alpha", o.alpha, "arc start token (default 0)");
    add_theta(meso);
    add_model(meso);
    add_stochastic(meso);
    add_format(meso);

    auto* spac = app.add_subcommand("spacings", "quantiles of normalized extremal spacings");
    spac->add_option("--n-list", o.n_list, "comma-separated sizes (default 1000,4000,16000)");
    add_theta(spac);
    add_stochastic(spac);
    add_format(spac);

    auto* coup = app.add_subcommand("coupling-check", "Feller coupling distance against its bound");
    coup->add_option("--n", o.n, "permutation size (default 1000)");
    coup->add_option("--epsilon-tail", o.epsilon_tail, "tail expectation budget (default 1e-5)");
    add_theta(coup);
    add_stochastic(coup);
    add_format(coup);

    auto* ids = app.add_subcommand("identities", "summation identities of Psi and Cesaro numbers");
    ids->add_option("--n", o.n, "size (default 500)");
    add_theta(ids);
    add_format(ids);

    std::vector<std::string> argv_store{"permspec"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    Output result;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (!(o.theta > 0.0) || !std::isfinite(o.theta)) throw UsageError("--theta must be positive");
        if (command == "sample") cmd_sample(o, result);
        else if (command == "exact-moments") cmd_exact_moments(o, result);
        else if (command == "constants") cmd_constants(o, result);
        else if (command == "clt") cmd_clt(o, result);
        else if (command == "mesoscopic") cmd_mesoscopic(o, result);
        else if (command == "spacings") cmd_spacings(o, result);
        else if (command == "coupling-check") cmd_coupling(o, result);
        else cmd_identities(o, result);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << sub->help();
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    result.config["format"] = o.format;

    if (o.format == "csv") {
        auto write_row = [&](const std::vector<std::string>& row) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
            out << "\r\n";
        };
        write_row(result.header);
        for (const auto& row : result.rows) write_row(row);
        return 0;
    }
    json envelope = {{"schema_version", kSchemaVersion},
                     {"command", command},
                     {"config_echo", result.config},
                     {"results", result.results},
                     {"timing_ms", elapsed.count()}};
    out << envelope.dump(2) << "\n";
    return 0;
}

}  // namespace permspec
