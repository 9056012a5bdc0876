#include <catch_amalgamated.hpp>

#include <cstdio>
#include <limits>

#include "hstar/csv_input.hpp"
#include "hstar/report.hpp"

using namespace hstar;

namespace {

const paired_rows& scores() {
    static const auto rows = read_paired(std::string(HSTAR_DATA_DIR) + "/loneliness_scores.csv");
    return rows;
}

trial_report six_candidates(std::uint64_t trials) {
    cache_options o;
    o.trials = trials;
    o.seed = 8;
    null_cache c(o);
    trial_spec t;
    t.n_prime = 6;
    t.log_transform = true;
    t.gof = gof_test::kolmogorov_smirnov;
    return run_trial(scores().pre, t, c, scores().ids);
}

} // namespace

TEST_CASE("JSON round trip is lossless", "[report]") {
    auto r = six_candidates(20000);
    CHECK(trial_report_from_json(to_json(r)) == r);
    // Through text as well.
    CHECK(trial_report_from_json(nlohmann::json::parse(render_report(r, report_format::json))) == r);

    r.candidates[0].h_star = std::numeric_limits<double>::infinity();
    r.candidates[0].p_value = 0;
    const auto j = to_json(r);
    CHECK(j["candidates"][0]["h_star"] == "inf");
    CHECK(trial_report_from_json(j) == r);
    CHECK(j["schema"] == "hstar.trial_report/1");

    auto wrong = j;
    wrong["schema"] = "hstar.trial_report/99";
    CHECK_THROWS_AS(trial_report_from_json(wrong), error);
    auto missing = j;
    missing.erase("fit");
    CHECK_THROWS_AS(trial_report_from_json(missing), error);
}

TEST_CASE("text report carries the decision and 4-decimal p-values", "[report]") {
    const auto r = six_candidates(20000);
    REQUIRE(r.verdict == decision::reject);
    const auto text = render_report(r, report_format::text);
    CHECK(text.find("decision: Reject") != std::string::npos);
    for (const auto& c: r.candidates) {
        char p[32];
        std::snprintf(p, sizeof p, "%.4f", c.p_value);
        CHECK(text.find(p) != std::string::npos);
    }
    CHECK(text.find("kolmogorov-smirnov") != std::string::npos);
}

TEST_CASE("six-candidate p-values match reference values", "[report]") {
    const auto r = six_candidates(1'000'000);
    const std::vector<std::pair<long long, double>> reference{
        {173, .0000}, {68, .0000}, {158, .0000}, {177, .0000}, {59, .0001}, {26, .0123}};
    REQUIRE(r.candidates.size() == reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
        CHECK(r.candidates[i].id == reference[i].first);
        CHECK(r.candidates[i].p_value == Catch::Approx(reference[i].second).margin(0.0005));
    }
}

TEST_CASE("scan rendering", "[report]") {
    cache_options o;
    o.trials = 20000;
    null_cache c(o);
    trial_spec t;
    t.log_transform = true;
    t.gof = gof_test::kolmogorov_smirnov;
    const auto scan = scan_trials(scores().pre, 2, {side::max}, t, c, scores().ids);
    const auto j = to_json(scan);
    CHECK(j["schema"] == "hstar.scan_report/1");
    CHECK(j["trials"].size() == 2);
    CHECK(j["selected"]["max"]["n_prime"] == 3);
    CHECK(j["selected"]["min"].is_null());
    const auto text = render_scan(scan, report_format::text);
    CHECK(text.find("selected (max): 173, 68, 158") != std::string::npos);
    CHECK(text.find("selected (min)") == std::string::npos);
    CHECK(parse_report_format("json") == report_format::json);
    CHECK_THROWS_AS(parse_report_format("xml"), error);
}
