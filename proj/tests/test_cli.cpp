#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "permspec/cli.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace permspec;
using nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

Run run_binary(const std::string& args) {
    Run r;
    const std::string cmd = std::string(PERMSPEC_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF records.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows(1);
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            rows.back().push_back(field);
            field.clear();
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            rows.back().push_back(field);
            field.clear();
            rows.emplace_back();
            ++i;
            any = false;
            continue;
        } else {
            field += c;
        }
        any = true;
    }
    if (any) rows.back().push_back(field);
    if (rows.back().empty()) rows.pop_back();
    return rows;
}

json results_of(const Run& r) { return json::parse(r.out).at("results"); }

}  // namespace

TEST_CASE("endpoint tokens") {
    const auto d = parse_endpoint_token("0.25");
    CHECK(d.kind == EndpointToken::Kind::rational);
    REQUIRE(d.endpoint.exact.has_value());
    CHECK(*d.endpoint.exact == Fraction(1, 4));
    CHECK(*parse_endpoint_token("rat:2/6").endpoint.exact == Fraction(1, 3));
    CHECK(*parse_endpoint_token("0").endpoint.exact == Fraction(0));
    const auto g = parse_endpoint_token("irr:golden");
    CHECK(g.kind == EndpointToken::Kind::irrational);
    CHECK(g.endpoint.value == doctest::Approx(0.6180339887498949));
    CHECK(!g.endpoint.exact.has_value());
    CHECK(parse_endpoint_token("1e-3").kind == EndpointToken::Kind::plain);
    CHECK_THROWS(parse_endpoint_token("irr:pi"));
    CHECK_THROWS(parse_endpoint_token("rat:1/0"));
    CHECK_THROWS(parse_endpoint_token("abc"));
    CHECK_THROWS(parse_endpoint_token("affine:1/2+1/3*alpha"));  // needs alpha
    const auto a = parse_endpoint_token("irr:sqrt2");
    const auto b = parse_endpoint_token("affine:1/2+1/3*alpha", &a);
    CHECK(b.kind == EndpointToken::Kind::affine);
    CHECK(b.endpoint.value == doctest::Approx(0.5 + (constants::sqrt2 - 1.0) / 3.0));
    CHECK_THROWS(parse_endpoint_token("affine:1/2+1/3*alpha", &d));  // alpha must be irrational
}

TEST_CASE("token classification") {
    const auto s2 = parse_endpoint_token("irr:sqrt2"), gold = parse_endpoint_token("irr:golden");
    const auto half = parse_endpoint_token("rat:1/2"), third = parse_endpoint_token("rat:1/3");
    const auto plain = parse_endpoint_token("1e-1");
    auto cls = classify(s2, gold);
    REQUIRE(cls.has_value());
    CHECK(std::holds_alternative<BothIrrationalIndependent>(*cls));
    cls = classify(third, half);
    REQUIRE(cls.has_value());
    CHECK(std::holds_alternative<BothRational>(*cls));
    cls = classify(half, gold);
    REQUIRE(cls.has_value());
    CHECK(std::holds_alternative<RationalAlpha>(*cls));
    CHECK(classify(s2, half).has_value());
    CHECK(!classify(plain, half).has_value());
    const auto aff = parse_endpoint_token("affine:1/2+1/3*alpha", &s2);
    cls = classify(s2, aff);
    REQUIRE(cls.has_value());
    CHECK(std::holds_alternative<AffineRelated>(*cls));
    CHECK(class_name(*cls) == "affine");
    // Width classes: rational difference, or irrational when exactly one side is.
    const auto w = classify_width(third, half);
    REQUIRE(w.has_value());
    CHECK(std::get<Fraction>(*w) == Fraction(1, 6));
    CHECK(std::holds_alternative<Irrational>(*classify_width(half, gold)));
}

TEST_CASE("documented examples") {
    const auto m = run({"exact-moments", "--n", "1", "--theta", "1", "--alpha", "0.2", "--beta", "0.7", "--model", "mod"});
    REQUIRE(m.code == 0);
    const auto mr = results_of(m);
    CHECK(mr.at("moments")[0].at("mean").get<double>() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(mr.at("moments")[0].at("variance").get<double>() == doctest::Approx(0.25).epsilon(1e-14));

    const auto c = run({"constants", "--case", "both-irrational-independent"});
    REQUIRE(c.code == 0);
    CHECK(c.out.find("\"c2\"") != std::string::npos);
    CHECK(results_of(c).at("closed_form").at("c2").get<double>() == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

    const auto i = run({"identities", "--n", "500", "--theta", "0.7"});
    REQUIRE(i.code == 0);
    const auto ir = results_of(i);
    CHECK(ir.at("identities").size() == 4);
    CHECK(ir.at("all_pass").get<bool>());
    CHECK(ir.at("max_relative_gap").get<double>() < 1e-8);
    for (const auto& id : ir.at("identities")) {
        CHECK(id.at("pass").get<bool>());
        CHECK(id.at("relative_gap").get<double>() < 1e-8);
    }
}

TEST_CASE("envelope") {
    const auto r = run({"sample", "--n", "12", "--seed", "4", "--trials", "3", "--theta", "0.5"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("schema_version") == kSchemaVersion);
    CHECK(j.at("command") == "sample");
    CHECK(j.at("config_echo").at("seed") == 4);
    CHECK(j.at("config_echo").at("theta") == 0.5);
    CHECK(j.at("config_echo").at("n") == 12);
    CHECK(j.at("timing_ms").is_number_integer());
    CHECK(j.at("results").at("samples").size() == 3);
}

TEST_CASE("exit codes") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"clt", "--n", "100", "--bogus"}).code == 2);
    const auto noseed = run({"clt", "--n", "100"});
    CHECK(noseed.code == 2);
    CHECK(noseed.err.find("seed") != std::string::npos);
    CHECK(noseed.out.empty());
    CHECK(run({"sample", "--n", "10", "--seed", "1", "--format", "xml"}).code == 2);
    CHECK(run({"clt", "--n", "100", "--seed", "1", "--alpha", "irr:pi"}).code == 2);
    CHECK(run({"mesoscopic", "--seed", "1", "--gamma", "1.0", "--n-list", "100"}).code == 2);
    // Runtime failures: variance cap, degenerate arc.
    CHECK(run({"exact-moments", "--n", "10000", "--alpha", "0.1", "--beta", "0.6", "--model", "perm"}).code == 1);
    CHECK(run({"clt", "--n", "100", "--seed", "1", "--alpha", "0.3", "--beta", "1.3", "--trials", "20"}).code == 1);

    CHECK(run_binary("identities --n 50").code == 0);
    CHECK(run_binary("clt --n 100 --bogus").code == 2);
    CHECK(run_binary("exact-moments --n 10000 --alpha 0.1 --beta 0.6 --model perm").code == 1);
}

TEST_CASE("csv output round-trips") {
    const std::vector<std::string> base = {"spacings", "--n-list", "60,120", "--trials", "40", "--seed", "8"};
    auto csv_args = base;
    csv_args.insert(csv_args.end(), {"--format", "csv"});
    const auto csv = run(csv_args);
    const auto js = run(base);
    REQUIRE(csv.code == 0);
    REQUIRE(js.code == 0);
    CHECK(csv.out.find("\r\n") != std::string::npos);
    const auto rows = parse_csv(csv.out);
    REQUIRE(rows.size() == 9);
    const auto& header = rows[0];
    CHECK(header[0] == "n");
    const auto jr = results_of(js).at("rows");
    int compared = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == header.size());
        const std::int64_t n = std::stoll(rows[i][0]);
        const auto& stat = rows[i][1];
        for (const auto& row : jr) {
            if (row.at("n") != n) continue;
            for (std::size_t k = 2; k < header.size(); ++k) {
                const double from_csv = std::strtod(rows[i][k].c_str(), nullptr);
                CHECK(from_csv == row.at(stat).at(header[k]).get<double>());
                ++compared;
            }
        }
    }
    CHECK(compared == 40);

    const auto clt = run({"clt", "--n", "500", "--trials", "30", "--seed", "2", "--format", "csv",
                          "--arcs", "0.1,0.6;irr:sqrt2,irr:golden"});
    REQUIRE(clt.code == 0);
    const auto crows = parse_csv(clt.out);
    REQUIRE(crows.size() == 31);
    CHECK(crows[0] == std::vector<std::string>{"trial", "count_0", "z_0", "count_1", "z_1"});
}

TEST_CASE("same seed gives the same output") {
    const std::vector<std::vector<std::string>> cmds = {
        {"sample", "--n", "50", "--seed", "9", "--trials", "4"},
        {"clt", "--n", "800", "--seed", "9", "--trials", "200", "--model", "perm"},
        {"mesoscopic", "--n-list", "1000,3000", "--seed", "9", "--trials", "100"},
        {"spacings", "--n-list", "100,300", "--seed", "9", "--trials", "100"},
        {"coupling-check", "--n", "300", "--seed", "9", "--trials", "500", "--theta", "0.5"},
    };
    for (const auto& c : cmds) {
        auto a = json::parse(run(c).out), b = json::parse(run(c).out);
        a.erase("timing_ms");
        b.erase("timing_ms");
        CHECK(a.dump() == b.dump());
        auto threaded = c;
        threaded.insert(threaded.end(), {"--jobs", "4"});
        CHECK(results_of(run(threaded)).dump() == a.at("results").dump());
        auto other = c;
        other[std::find(other.begin(), other.end(), std::string("--seed")) - other.begin() + 1] = "10";
        CHECK(results_of(run(other)).dump() != a.at("results").dump());
    }
}
