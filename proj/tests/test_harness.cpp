#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <jetfol/harness.hpp>

#include <cstdio>

using namespace jetfol;
using namespace jetfol::harness;

namespace {

Scenario quick(const std::string& suite)
{
    Scenario s;
    s.suite = suite;
    s.seed = 7;
    s.trials = 4;
    return s;
}

} // namespace

TEST_CASE("scenario validation")
{
    Scenario s;
    s.suite = "nope";
    CHECK_THROWS_WITH_AS(s.validate(),
                         doctest::Contains("unknown suite"), error);
    s.suite = "jets";
    s.order = 99;
    CHECK_THROWS_AS(s.validate(), error);
    s.order = 10;
    s.trials = 100000;
    CHECK_THROWS_AS(s.validate(), error);
    s.trials = 10;
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("reports are deterministic and checks pass")
{
    for (const std::string suite : {"schwarzian", "projective"}) {
        Scenario s = quick(suite);
        Report a = run_suite(s);
        Report b = run_suite(s);
        CHECK(a.all_passed());
        CHECK(report_json(a).dump(2) == report_json(b).dump(2));
        CHECK(a.count("pass") == int(a.checks.size()));
    }
}

TEST_CASE("records are sorted by name and timings are suppressed in exact mode")
{
    Scenario s = quick("schwarzian");
    Report rep = run_suite(s);
    for (std::size_t i = 1; i < rep.checks.size(); ++i)
        CHECK(rep.checks[i - 1].name < rep.checks[i].name);
    auto j = report_json(rep);
    for (const auto& c : j["checks"])
        CHECK(c["elapsed_ms"].get<long long>() == 0);
}

TEST_CASE("empty report is a valid document")
{
    Report rep;
    rep.scenario = quick("jets");
    auto j = report_json(rep);
    CHECK(j["checks"].is_array());
    CHECK(j["checks"].empty());
    CHECK(j["totals"]["pass"] == 0);
    CHECK(j["totals"]["fail"] == 0);
}

TEST_CASE("json emit round trip reproduces the record list")
{
    Scenario s = quick("schwarzian");
    Report rep = run_suite(s);
    std::string path = "harness_roundtrip_test.json";
    emit_report(rep, "json", path);
    std::ifstream in(path);
    REQUIRE(bool(in));
    nlohmann::json parsed = nlohmann::json::parse(in);
    in.close();
    std::remove(path.c_str());

    REQUIRE(parsed["checks"].size() == rep.checks.size());
    for (std::size_t i = 0; i < rep.checks.size(); ++i) {
        const auto& c = parsed["checks"][i];
        CHECK(c["name"].get<std::string>() == rep.checks[i].name);
        CHECK(c["anchor"].get<std::string>() == rep.checks[i].anchor);
        CHECK(c["status"].get<std::string>() == rep.checks[i].status);
        if (rep.checks[i].exact)
            CHECK(c["residual"].is_null());
        else
            CHECK(c["residual"].get<double>() == doctest::Approx(rep.checks[i].residual));
    }
    CHECK(parsed["suite"].get<std::string>() == s.suite);
    CHECK(parsed["seed"].get<std::uint64_t>() == s.seed);
}

TEST_CASE("text report renders a table with totals")
{
    Scenario s = quick("schwarzian");
    Report rep = run_suite(s);
    std::string text = report_text(rep);
    CHECK(text.find("suite: schwarzian") != std::string::npos);
    CHECK(text.find("totals: pass=") != std::string::npos);
    CHECK(text.find("fail=0") != std::string::npos);
}
