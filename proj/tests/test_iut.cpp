#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "hstar/csv_input.hpp"
#include "hstar/iut.hpp"
#include "hstar/report.hpp"
#include "oracles.hpp"

using namespace hstar;

namespace {

null_cache& shared_nulls() {
    static null_cache c([] {
        cache_options o;
        o.trials = 200000;
        o.seed = 42;
        return o;
    }());
    return c;
}

const paired_rows& scores() {
    static const auto rows = read_paired(std::string(HSTAR_DATA_DIR) + "/loneliness_scores.csv");
    return rows;
}

trial_spec log_ks(int n_prime, side s = side::max) {
    trial_spec t;
    t.n_prime = n_prime;
    t.extreme = s;
    t.log_transform = true;
    t.gof = gof_test::kolmogorov_smirnov;
    return t;
}

std::vector<long long> ids_of(const trial_report& r) {
    std::vector<long long> out;
    for (const auto& c: r.candidates) out.push_back(c.id);
    return out;
}

} // namespace

TEST_CASE("pretest: six candidates reject, seven do not", "[iut]") {
    const auto& d = scores();
    const auto six = run_trial(d.pre, log_ks(6), shared_nulls(), d.ids);
    CHECK(ids_of(six) == std::vector<long long>{173, 68, 158, 177, 59, 26});
    CHECK(six.verdict == decision::reject);
    for (const auto& c: six.candidates) CHECK(c.p_value < 0.05);
    CHECK(six.n == 180);
    CHECK(six.null_size == 175);

    const auto seven = run_trial(d.pre, log_ks(7), shared_nulls(), d.ids);
    REQUIRE(seven.candidates.size() == 7);
    CHECK(seven.candidates.back().id == 9);
    CHECK(seven.candidates.back().p_value > 0.99);
    CHECK(seven.verdict == decision::do_not_reject);
}

TEST_CASE("posttest: no trial rejects on either side", "[iut]") {
    const auto& d = scores();
    for (side s: {side::max, side::min}) {
        for (int k = 1; k <= 6; ++k) {
            const auto r = run_trial(d.post, log_ks(k, s), shared_nulls(), d.ids);
            CHECK(r.verdict == decision::do_not_reject);
        }
    }
}

TEST_CASE("scan selects the largest rejecting set", "[iut]") {
    const auto& d = scores();
    const auto scan = scan_trials(d.pre, 7, {side::max}, log_ks(1), shared_nulls(), d.ids);
    REQUIRE(scan.selected_max);
    auto ids = ids_of(*scan.entries[*scan.selected_max].report);
    std::sort(ids.begin(), ids.end());
    CHECK(ids == std::vector<long long>{26, 59, 68, 158, 173, 177});
    CHECK(!scan.selected_min);

    // Smallest rule picks the single most extreme point.
    const auto first = scan_trials(d.pre, 7, {side::max}, log_ks(1), shared_nulls(), d.ids, selection_rule::smallest);
    REQUIRE(first.selected_max);
    CHECK(ids_of(*first.entries[*first.selected_max].report) == std::vector<long long>{173});
}

TEST_CASE("ties at the cut join the candidate set", "[iut]") {
    const auto& d = scores();
    // 68 and 158 share a score, so two candidates become three.
    const auto r = run_trial(d.pre, log_ks(2), shared_nulls(), d.ids);
    CHECK(r.n_prime == 3);
    CHECK(r.spec.n_prime == 2);
    CHECK(ids_of(r) == std::vector<long long>{173, 68, 158});
    CHECK(std::any_of(r.notices.begin(), r.notices.end(),
                      [](const std::string& s) { return s.find("raised from 2 to 3") != std::string::npos; }));

    const auto split = split_candidates(std::vector<double>{1, 2, 3, 4, 5, 9, 9}, 1, side::max, false);
    CHECK(split.k == 2);
}

TEST_CASE("two clustered far points: one candidate fails, two succeed", "[iut]") {
    // Fifteen ordinary points and a tight pair about five sd out.
    auto v = oracle::normals(15, 2718);
    v.push_back(5.0);
    v.push_back(5.2);
    trial_spec t;
    t.n_prime = 1;
    t.gof = gof_test::lilliefors;
    const auto one = run_trial(v, t, shared_nulls());
    t.n_prime = 2;
    const auto two = run_trial(v, t, shared_nulls());
    CHECK(one.verdict == decision::do_not_reject);
    CHECK(two.verdict == decision::reject);
}

TEST_CASE("pure normal data rarely rejects", "[iut]") {
    int rejected = 0;
    const int reps = 200;
    trial_spec t;
    t.gof = gof_test::lilliefors;
    for (int r = 0; r < reps; ++r) {
        const auto v = oracle::normals(30, 100 + r);
        if (run_trial(v, t, shared_nulls()).verdict == decision::reject) ++rejected;
    }
    // Nominal 5%; the conservative p-value can only lower it.
    CHECK(rejected/static_cast<double>(reps) <= 0.09);
}

TEST_CASE("decision is reject exactly when every p is below alpha", "[iut]") {
    const auto& d = scores();
    for (int k = 1; k <= 7; ++k) {
        for (double alpha: {0.05, 0.01, 0.001}) {
            auto spec = log_ks(k);
            spec.alpha = alpha;
            const auto r = run_trial(d.pre, spec, shared_nulls(), d.ids);
            double worst = 0;
            for (const auto& c: r.candidates) worst = std::max(worst, c.p_value);
            if (r.fit_rejected) REQUIRE(r.verdict == decision::withheld);
            else REQUIRE((r.verdict == decision::reject) == (worst < alpha));
        }
    }
}

TEST_CASE("rejected fit withholds the decision or throws when strict", "[iut]") {
    const auto& d = scores();
    trial_spec ad = log_ks(6);
    ad.gof = gof_test::anderson_darling;
    const auto r = run_trial(d.pre, ad, shared_nulls(), d.ids);
    CHECK(r.fit_rejected);
    CHECK(r.verdict == decision::withheld);
    CHECK(!r.notices.empty());
    // The per-candidate results are still reported.
    CHECK(r.candidates.size() == 6);

    ad.strict_fit = true;
    CHECK_THROWS_MATCHES(run_trial(d.pre, ad, shared_nulls(), d.ids), error,
                         Catch::Matchers::Predicate<error>([](const error& e) {
                             return e.code() == errc::fit_rejected;
                         }));
    // In a scan the failure is recorded per trial.
    const auto scan = scan_trials(d.pre, 2, {side::max}, ad, shared_nulls(), d.ids);
    REQUIRE(scan.entries.size() == 2);
    CHECK(scan.entries[0].error_code == errc::fit_rejected);
    CHECK(!scan.selected_max);
}

TEST_CASE("invalid trials", "[iut]") {
    const std::vector<double> v{1, 2, 3, 4, 5, 6};
    trial_spec t;
    t.n_prime = 3;
    CHECK_THROWS_MATCHES(run_trial(v, t, shared_nulls()), error,
                         Catch::Matchers::Predicate<error>([](const error& e) {
                             return e.code() == errc::too_few_ordinary;
                         }));
    t.n_prime = 0;
    CHECK_THROWS_AS(run_trial(v, t, shared_nulls()), error);
    t.n_prime = 1;
    t.alpha = 1.5;
    CHECK_THROWS_AS(run_trial(v, t, shared_nulls()), error);
    t.alpha = 0.05;
    t.prior = dist_kind::truncated_normal;
    CHECK_THROWS_AS(run_trial(v, t, shared_nulls()), error);
    t.prior = dist_kind::normal;
    t.log_transform = true;
    CHECK_THROWS_AS(run_trial(std::vector<double>{1, 2, 0, 4, 5, 6}, t, shared_nulls()), error);
    const std::vector<long long> short_ids{1, 2};
    t.log_transform = false;
    CHECK_THROWS_AS(run_trial(v, t, shared_nulls(), short_ids), error);
}

TEST_CASE("lognormal prior on raw data", "[iut]") {
    auto v = draw_sample(distribution_spec::lognormal(1, 0.5), 40, 9);
    v.push_back(200);
    trial_spec t;
    t.prior = dist_kind::lognormal;
    t.gof = gof_test::lilliefors;
    const auto r = run_trial(v, t, shared_nulls());
    CHECK(r.fit.fitted.kind == dist_kind::lognormal);
    CHECK(r.candidates.front().value == 200);
    CHECK(r.verdict == decision::reject);
}

TEST_CASE("scans are deterministic for a fixed seed", "[iut]") {
    const auto& d = scores();
    auto run = [&] {
        cache_options o;
        o.trials = 20000;
        o.seed = 3;
        null_cache c(o);
        return render_scan(scan_trials(d.post, 3, {side::max, side::min}, log_ks(1), c, d.ids), report_format::json);
    };
    CHECK(run() == run());
}
