#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hstar/core_stat.hpp"
#include "hstar/error.hpp"
#include "oracles.hpp"

using namespace hstar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

sample mx(std::vector<double> v) { return {std::move(v), side::max}; }

weight_spec weights(std::vector<double> w) {
    weight_spec s;
    s.candidate_weights = std::move(w);
    return s;
}

} // namespace

TEST_CASE("worked example follows the definition", "[core_stat]") {
    // Numerator 50/3; ordinary pairs (3,4), (3,5), (4,5) give 1 + 4 + 1.
    const double expected = std::sqrt((50.0/3)/(6.0/3));
    const auto d = h_star_definitional(mx({3, 4, 5, 8}));
    CHECK_THAT(d.h_star, WithinRel(expected, 1e-12));
    CHECK_THAT(oracle::h_star({3, 4, 5, 8}), WithinRel(expected, 1e-12));
    CHECK(d.candidate_index == 3);
    CHECK(d.candidate_value == 8);
    CHECK(d.nu == 2);
    CHECK_THAT(h_star_algebraic(mx({3, 4, 5, 8})).h_star, WithinRel(expected, 1e-12));
}

TEST_CASE("lower bound and degenerate samples", "[core_stat]") {
    CHECK_THAT(h_star_definitional(mx({0, 5, 5, 5})).h_star, WithinAbs(1/std::sqrt(2.0), 1e-12));
    CHECK_THAT(h_star_algebraic(mx({0, 5, 5, 5})).h_star, WithinAbs(1/std::sqrt(2.0), 1e-12));

    const auto inf = h_star_definitional(mx({0, 0, 0, 7}));
    CHECK(std::isinf(inf.h_star));
    CHECK(inf.degenerate);
    CHECK(std::isinf(h_star_algebraic(mx({0, 0, 0, 7})).h_star));

    CHECK_THROWS_MATCHES(h_star_definitional(mx({2, 2, 2, 2})), error,
                         Catch::Matchers::Predicate<error>([](const error& e) {
                             return e.code() == errc::all_values_identical;
                         }));
    CHECK_THROWS_AS(h_star_algebraic(mx({1, 2, 3})), error);
    CHECK_THROWS_AS(h_star_algebraic(mx({1, 2, NAN, 3})), error);
}

TEST_CASE("definitional and algebraic forms agree with the oracle", "[core_stat]") {
    std::mt19937_64 g(42);
    std::uniform_int_distribution<int> size(4, 50);
    for (int rep = 0; rep < 1000; ++rep) {
        auto v = oracle::normals(static_cast<std::size_t>(size(g)), 1000 + rep, 3.0, 2.0);
        const double ref = oracle::h_star(v);
        const auto a = h_star_algebraic(mx(v));
        const auto d = h_star_definitional(mx(v));
        REQUIRE_THAT(d.h_star, WithinRel(ref, 1e-10));
        REQUIRE_THAT(a.h_star, WithinRel(ref, 1e-10));
        REQUIRE_THAT(a.h_tilde, WithinRel(std::sqrt(2.0/(v.size() - 2))*ref, 1e-10));
    }
    auto big = oracle::normals(200, 7);
    CHECK_THAT(h_star_algebraic(mx(big)).h_star, WithinRel(oracle::h_star(big), 1e-10));
}

TEST_CASE("large offsets do not cancel", "[core_stat]") {
    std::vector<double> v{3, 4, 5, 8};
    for (auto& x: v) x += 1e9;
    CHECK_THAT(h_star_algebraic(mx(v)).h_star, WithinRel(std::sqrt(50.0/6), 1e-9));
}

TEST_CASE("difference space", "[core_stat]") {
    const auto r = difference_space(mx({3, 4, 5, 8}));
    REQUIRE(r.u.size() == 3);
    CHECK(r.u[0] == 5);
    CHECK(r.u[1] == 4);
    CHECK(r.u[2] == 3);
    CHECK(r.q == 12);
    CHECK(r.r2 == 50);
    CHECK_THAT(r.q_over_r_sq, WithinRel(2.88, 1e-12));
    CHECK_THAT(r.h_tilde, WithinRel(1/std::sqrt(3 - 2.88), 1e-10));
    CHECK_THAT(r.h_tilde, WithinRel(h_star_algebraic(mx({3, 4, 5, 8})).h_tilde, 1e-10));

    const auto flat = difference_space(mx({0, 5, 5, 5}));
    CHECK_THAT(flat.q_over_r_sq, WithinAbs(1, 1e-12));
    CHECK_THAT(flat.h_tilde, WithinRel(1/std::sqrt(2.0), 1e-12));

    for (int rep = 0; rep < 200; ++rep) {
        auto v = oracle::normals(4 + rep % 40, 500 + rep);
        const auto ds = difference_space(mx(v));
        const double n = static_cast<double>(v.size());
        REQUIRE(ds.q_over_r_sq >= 1 - 1e-12);
        REQUIRE(ds.q_over_r_sq <= n - 1 + 1e-12);
        REQUIRE_THAT(ds.h_tilde, WithinRel(std::sqrt(2/(n - 2))*oracle::h_star(v), 1e-10));
    }
}

TEST_CASE("range, affine invariance and reversal", "[core_stat]") {
    for (int rep = 0; rep < 500; ++rep) {
        auto v = oracle::normals(4 + rep % 60, 9000 + rep);
        const auto h = h_star_algebraic(mx(v));
        REQUIRE(h.h_star >= 1/std::sqrt(2.0) - 1e-12);
        REQUIRE(h.h_tilde >= 1/std::sqrt(v.size() - 2.0) - 1e-12);

        auto w = v;
        for (auto& x: w) x = 3.7*x - 120;
        REQUIRE_THAT(h_star_algebraic(mx(w)).h_star, WithinRel(h.h_star, 1e-10));

        auto neg = v;
        for (auto& x: neg) x = -x;
        REQUIRE(h_star_algebraic({v, side::min}).h_star == h_star_algebraic(mx(neg)).h_star);
        REQUIRE(h_star_definitional({v, side::min}).h_star == h_star_definitional(mx(neg)).h_star);
    }
    const auto m = h_star_algebraic({{1, 4, 5, 6}, side::min});
    CHECK(m.candidate_value == 1);
    CHECK(m.candidate_index == 0);
}

TEST_CASE("duplicate maxima stay ordinary", "[core_stat]") {
    // One 9 is the candidate, the other is ordinary.
    std::vector<double> v{1, 2, 9, 9};
    CHECK_THAT(h_star_definitional(mx(v)).h_star, WithinRel(oracle::h_star(v), 1e-12));
    CHECK(std::isfinite(h_star_definitional(mx(v)).h_star));
}

TEST_CASE("weighted and generalized forms", "[core_stat]") {
    const sample s = mx({3, 4, 5, 8});
    weight_spec unit = weights({1, 1, 1, 1});
    CHECK_THAT(h_star_weighted(s, unit), WithinRel(std::sqrt(50.0/6), 1e-12));
    CHECK_THAT(h_star_generalized(s, unit), WithinRel(std::sqrt(50.0/6), 1e-12));

    // Candidate weights (2, 1, 1), pair weights by geometric mean.
    weight_spec w = weights({2, 1, 1, 0});
    const double num = (2*25.0 + 16 + 9)/4;
    const double w34 = std::sqrt(2.0), w35 = std::sqrt(2.0), w45 = 1;
    const double den = (w34*1 + w35*4 + w45*1)/(w34 + w35 + w45);
    CHECK_THAT(h_star_weighted(s, w), WithinRel(std::sqrt(num/den), 1e-12));

    // Zero weight is the same as deleting the point.
    weight_spec drop = weights({1, 0, 1, 1});
    CHECK_THAT(h_star_weighted(s, drop), WithinRel(oracle::h_star({3, 5, 8}), 1e-12));

    weight_spec e1 = weights({1, 1, 1, 1});
    e1.eta = 1;
    CHECK_THAT(h_star_generalized(s, e1), WithinRel(3.0, 1e-12));

    // Direct transcription at eta = 4.
    weight_spec e4 = weights({1, 1, 1, 1});
    e4.eta = 4;
    const double n4 = (625.0 + 256 + 81)/3, d4 = (1.0 + 16 + 1)/3;
    CHECK_THAT(h_star_generalized(s, e4), WithinRel(std::pow(n4/d4, 0.25), 1e-12));

    weight_spec zero = weights({0, 0, 0, 1});
    CHECK_THROWS_AS(h_star_weighted(s, zero), error);
    weight_spec bad_eta = weights({1, 1, 1, 1});
    bad_eta.eta = 0;
    CHECK_THROWS_AS(h_star_generalized(s, bad_eta), error);

    weight_spec mat = weights({1, 1, 1, 1});
    mat.rule = pair_rule::explicit_matrix;
    mat.pair_weights.assign(16, 1.0);
    CHECK_THAT(h_star_weighted(s, mat), WithinRel(std::sqrt(50.0/6), 1e-12));
}

TEST_CASE("simulation kernels", "[core_stat]") {
    for (int rep = 0; rep < 200; ++rep) {
        auto v = oracle::normals(4 + rep % 30, 300 + rep);
        const double ref = oracle::h_star(v);
        REQUIRE_THAT(h_star_of_max(v), WithinRel(ref, 1e-10));
        auto it = std::max_element(v.begin(), v.end());
        const double cand = *it;
        v.erase(it);
        REQUIRE_THAT(h_star_with_candidate(v, cand), WithinRel(ref, 1e-10));
    }
    const std::vector<double> flat{2, 2, 2};
    CHECK(std::isinf(h_star_with_candidate(flat, 5)));
    CHECK_THAT(h_tilde_from(2.0, 10), WithinRel(2*std::sqrt(0.25), 1e-15));
}
