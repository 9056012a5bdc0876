#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hstar/bayes.hpp"
#include "hstar/csv_input.hpp"
#include "hstar/error.hpp"

using namespace hstar;
using Catch::Matchers::WithinAbs;

namespace {

bayes_spec small_spec() {
    bayes_spec s;
    s.trials = 40000;
    s.seed = 13;
    return s;
}

const likelihood_tables& tables10() {
    static const auto t = build_likelihood_tables(10, small_spec());
    return t;
}

std::vector<double> cdf(const std::vector<double>& mass) {
    std::vector<double> c(mass.size());
    std::partial_sum(mass.begin(), mass.end(), c.begin());
    return c;
}

// Smallest bin index whose cumulative mass reaches q.
std::size_t quantile_bin(const std::vector<double>& mass, double q) {
    const auto c = cdf(mass);
    const double total = c.back();
    return static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), q*total) - c.begin());
}

} // namespace

TEST_CASE("likelihood tables are distributions", "[bayes]") {
    const auto& t = tables10();
    CHECK(t.n() == 10);
    CHECK_THAT(std::accumulate(t.l0().begin(), t.l0().end(), 0.0), WithinAbs(1, 1e-9));
    CHECK_THAT(std::accumulate(t.l1_marginal().begin(), t.l1_marginal().end(), 0.0), WithinAbs(1, 1e-9));
    for (std::size_t k = 0; k < t.deltas().size(); ++k) {
        const auto l = t.l1(k);
        REQUIRE_THAT(std::accumulate(l.begin(), l.end(), 0.0), WithinAbs(1, 1e-9));
    }
    CHECK(t.deltas().front() == 0);
    CHECK_THAT(t.deltas().back(), WithinAbs(4*5.0, 1e-12));
    CHECK(t.deltas().size() == 65);
    CHECK(t.epsilon() == 1.0/(10*40000));
}

TEST_CASE("no shift reproduces the null law", "[bayes]") {
    const auto& t = tables10();
    const auto a = cdf(t.l1(0)), b = cdf(t.l0());
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    // Two-sample KS critical value at the 1% level for 40000 draws each.
    CHECK(d < 1.63*std::sqrt(2.0/40000));

    // A large shift moves the bulk beyond the null's upper tail.
    CHECK(quantile_bin(t.l1(t.deltas().size() - 1), 0.5) > quantile_bin(t.l0(), 0.95));
}

TEST_CASE("posterior from likelihoods", "[bayes]") {
    CHECK_THAT(posterior_from_likelihoods(0.3, 0.3), WithinAbs(0.5, 1e-6));
    CHECK_THAT(posterior_from_likelihoods(2.0, 2.0, 16), WithinAbs(0.5, 1e-6));
    CHECK(posterior_from_likelihoods(0, 1) == 0);
    CHECK(posterior_from_likelihoods(1, 0) == 1);
    // Swapping the likelihoods mirrors the posterior, as the prior is symmetric.
    CHECK_THAT(posterior_from_likelihoods(3, 1) + posterior_from_likelihoods(1, 3), WithinAbs(1, 1e-9));
    double prev = 0;
    for (double r = 0.01; r < 100; r *= 1.3) {
        const double p = posterior_from_likelihoods(r, 1);
        REQUIRE(p >= prev);
        prev = p;
    }
    CHECK_THROWS_AS(posterior_from_likelihoods(-1, 1), error);
}

TEST_CASE("posterior sweep: bounded and monotone", "[bayes]") {
    const auto& t = tables10();
    const auto s = small_spec();
    double prev = 0;
    for (double h = 0.71; h < 12; h += 0.01) {
        const double p = posterior(h, t, s);
        REQUIRE(p >= 0);
        REQUIRE(p <= 1);
        REQUIRE(p >= prev - 1e-12);
        prev = p;
    }
    CHECK(posterior(1.0, t, s) < 0.5);
    // Far tail: the smoothing mass caps the likelihood ratio.
    CHECK(posterior(10.0, t, s) > 0.75);
    CHECK_THROWS_MATCHES(posterior(0.5, t, s), error, Catch::Matchers::Predicate<error>([](const error& e) {
                             return e.code() == errc::out_of_support;
                         }));
}

TEST_CASE("quadrature refinement changes little", "[bayes]") {
    const auto coarse = small_spec();
    auto fine = coarse;
    fine.delta_intervals = 128;
    fine.pi_nodes = 256;
    const auto tf = build_likelihood_tables(10, fine);
    for (double h: {2.0, 2.6, 3.0, 4.0, 6.0}) {
        const double a = posterior(h, tables10(), coarse), b = posterior(h, tf, fine);
        CHECK(std::abs(a - b) < 0.01*std::max(a, b));
    }
}

TEST_CASE("combined posterior", "[bayes]") {
    // Hand enumeration for two candidates: outcomes (1,0) and (1,1).
    for (auto [p1, p2]: {std::pair{0.9, 0.8}, std::pair{0.3, 0.6}, std::pair{0.99, 0.01}}) {
        const double k = p1*(1 - p2) + p1*p2;
        const auto r = combined_posterior(std::vector<double>{p1, p2});
        CHECK_THAT(r.k, WithinAbs(k, 1e-12));
        CHECK_THAT(r.combined, WithinAbs(p1*p2/k, 1e-9));

        const double k0 = k + (1 - p1)*(1 - p2);
        const auto z = combined_posterior(std::vector<double>{p1, p2}, true);
        CHECK_THAT(z.combined, WithinAbs(p1*p2/k0, 1e-9));
    }
    // One candidate against the two-outcome family gives back its posterior.
    CHECK_THAT(combined_posterior(std::vector<double>{0.7}, true).combined, WithinAbs(0.7, 1e-12));
    const double e = 1e-9;
    CHECK_THAT(combined_posterior(std::vector<double>{1 - e, 1 - e, 1 - e}).combined, WithinAbs(1, 1e-6));
    CHECK_THROWS_MATCHES(combined_posterior(std::vector<double>{0, 0.5}), error,
                         Catch::Matchers::Predicate<error>([](const error& x) {
                             return x.code() == errc::degenerate_normalizer;
                         }));
    CHECK_THROWS_AS(combined_posterior(std::vector<double>{1.5}), error);
}

TEST_CASE("spec validation", "[bayes]") {
    auto s = small_spec();
    s.tau = 0;
    CHECK_THROWS_AS(validate(s), error);
    s = small_spec();
    s.delta_intervals = 0;
    CHECK_THROWS_AS(validate(s), error);
    CHECK_NOTHROW(validate(small_spec()));
}

TEST_CASE("loneliness pretest: the most extreme score is an outlier", "[bayes]") {
    const auto rows = read_paired(std::string(HSTAR_DATA_DIR) + "/loneliness_scores.csv");
    const auto r = bayes_analysis(rows.pre, 6, side::max, true, small_spec(), rows.ids);
    REQUIRE(r.candidates.size() == 6);
    CHECK(r.candidates[0].id == 173);
    CHECK(r.candidates[0].posterior > 0.8);
    // The null tail is empty there, so less smoothing mass means more belief.
    CHECK(r.candidates[0].posterior_eps_low > r.candidates[0].posterior);
    CHECK(r.candidates[0].posterior > r.candidates[0].posterior_eps_high);
    for (const auto& c: r.candidates) {
        REQUIRE(c.posterior >= 0);
        REQUIRE(c.posterior <= 1);
    }
    CHECK(r.combined.k > 0);
    CHECK(r.combined.combined >= 0);
    CHECK(r.combined.combined <= 1);
}
