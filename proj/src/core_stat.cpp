#include "hstar/core_stat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hstar/error.hpp"

namespace hstar {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Values on the working scale (negated for side::min) and the index of the
// single instance treated as candidate: the first occurrence of the maximum.
struct oriented {
    std::vector<double> x;
    std::size_t cand = 0;
};

oriented orient(const sample& s) {
    validate(s);
    oriented o;
    o.x = s.values;
    if (s.extreme == side::min) {
        for (auto& v: o.x) v = -v;
    }
    o.cand = static_cast<std::size_t>(std::max_element(o.x.begin(), o.x.end()) - o.x.begin());
    return o;
}

bool ordinary_all_equal(const oriented& o) {
    double first = 0;
    bool seen = false;
    for (std::size_t k = 0; k < o.x.size(); ++k) {
        if (k == o.cand) continue;
        if (!seen) {
            first = o.x[k];
            seen = true;
        }
        else if (o.x[k] != first) {
            return false;
        }
    }
    return true;
}

void check_not_constant(const oriented& o) {
    if (ordinary_all_equal(o) && o.x[o.cand == 0 ? 1 : 0] == o.x[o.cand]) {
        fail(errc::all_values_identical, "h* is undefined when every value is equal");
    }
}

// Q and R^2 over the differences from the candidate.
std::pair<double, double> q_r2(const oriented& o) {
    double q = 0, r2 = 0;
    for (std::size_t k = 0; k < o.x.size(); ++k) {
        if (k == o.cand) continue;
        double u = o.x[o.cand] - o.x[k];
        q += u;
        r2 += u*u;
    }
    return {q, r2};
}

hstar_outcome make_outcome(const sample& s, const oriented& o, double h) {
    hstar_outcome out;
    out.n = static_cast<int>(o.x.size());
    out.nu = out.n - 2;
    out.candidate_index = o.cand;
    out.candidate_value = s.values[o.cand];
    out.h_star = h;
    out.degenerate = std::isinf(h);
    out.h_tilde = out.degenerate ? inf : h_tilde_from(h, out.n);
    auto [q, r2] = q_r2(o);
    out.q_over_r_sq = out.degenerate ? out.n - 1.0 : q*q/r2;
    return out;
}

double holder_ratio(const sample& s, const weight_spec& w, double eta) {
    auto o = orient(s);
    check_not_constant(o);
    const std::size_t n = o.x.size();
    if (w.candidate_weights.size() != n) {
        fail(errc::invalid_argument, "expected " + std::to_string(n) + " candidate weights, got "
             + std::to_string(w.candidate_weights.size()));
    }
    if (w.rule == pair_rule::explicit_matrix && w.pair_weights.size() != n*n) {
        fail(errc::invalid_argument, "explicit pair weights must be an n x n matrix");
    }
    for (double v: w.candidate_weights) {
        if (!(v >= 0) || !std::isfinite(v)) fail(errc::invalid_argument, "weights must be finite and >= 0");
    }
    for (double v: w.pair_weights) {
        if (!(v >= 0) || !std::isfinite(v)) fail(errc::invalid_argument, "weights must be finite and >= 0");
    }

    const double xs = o.x[o.cand];
    double num = 0, num_w = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == o.cand) continue;
        num += w.candidate_weights[k]*std::pow(std::abs(o.x[k] - xs), eta);
        num_w += w.candidate_weights[k];
    }
    double den = 0, den_w = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == o.cand) continue;
        for (std::size_t j = 0; j < i; ++j) {
            if (j == o.cand) continue;
            double wij = w.rule == pair_rule::geometric_mean
                ? std::sqrt(w.candidate_weights[i]*w.candidate_weights[j])
                : w.pair_weights[i*n + j];
            den += wij*std::pow(std::abs(o.x[i] - o.x[j]), eta);
            den_w += wij;
        }
    }
    if (num_w == 0) fail(errc::zero_weight_mass, "candidate-difference weights sum to zero");
    if (den_w == 0) fail(errc::zero_weight_mass, "ordinary pair weights sum to zero");
    if (den == 0) return inf;
    return std::pow((num/num_w)/(den/den_w), 1.0/eta);
}

} // namespace

const char* to_string(side s) noexcept {
    return s == side::max ? "max" : "min";
}

void validate(const sample& s) {
    if (s.values.size() < 4) {
        fail(errc::too_few_observations, "need at least 4 values, got " + std::to_string(s.values.size()));
    }
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        if (!std::isfinite(s.values[k])) {
            fail(errc::non_finite_value, "value " + std::to_string(k) + " is not finite");
        }
    }
}

hstar_outcome h_star_definitional(const sample& s) {
    auto o = orient(s);
    check_not_constant(o);
    const std::size_t n = o.x.size();
    const double xs = o.x[o.cand];

    double num = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double d = o.x[k] - xs;
        num += d*d;
    }
    num /= static_cast<double>(n - 1);

    double den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == o.cand) continue;
        for (std::size_t j = 0; j < i; ++j) {
            if (j == o.cand) continue;
            double d = o.x[i] - o.x[j];
            den += d*d;
        }
    }
    den /= static_cast<double>((n - 1)*(n - 2))/2.0;

    return make_outcome(s, o, den == 0 ? inf : std::sqrt(num/den));
}

hstar_outcome h_star_algebraic(const sample& s) {
    auto o = orient(s);
    check_not_constant(o);
    if (ordinary_all_equal(o)) return make_outcome(s, o, inf);

    const double n = static_cast<double>(o.x.size());
    const double shift = std::accumulate(o.x.begin(), o.x.end(), 0.0)/n;
    double s1 = 0, s2 = 0;
    for (double v: o.x) {
        double y = v - shift;
        s1 += y;
        s2 += y*y;
    }
    const double c = o.x[o.cand] - shift;
    const double num = s2 - 2*c*s1 + n*c*c;
    const double rest = s1 - c;
    const double den = (n - 1)*(s2 - c*c) - rest*rest;
    if (!(den > 0)) return make_outcome(s, o, inf);
    return make_outcome(s, o, std::sqrt((n - 2)/2.0)*std::sqrt(num/den));
}

difference_space_result difference_space(const sample& s) {
    auto o = orient(s);
    check_not_constant(o);
    const double xs = o.x[o.cand];

    std::vector<double> ordinary;
    ordinary.reserve(o.x.size() - 1);
    for (std::size_t k = 0; k < o.x.size(); ++k) {
        if (k != o.cand) ordinary.push_back(o.x[k]);
    }
    std::sort(ordinary.begin(), ordinary.end());

    difference_space_result r;
    r.u.reserve(ordinary.size());
    for (double v: ordinary) {
        double u = xs - v;
        r.u.push_back(u);
        r.q += u;
        r.r2 += u*u;
    }
    const double n = static_cast<double>(o.x.size());
    r.q_over_r_sq = r.q*r.q/r.r2;
    // Cauchy-Schwarz caps the ratio at n - 1; equality means every U_k is
    // equal and h~ is unbounded.
    const double gap = (n - 1) - r.q_over_r_sq;
    bool equal_u = std::all_of(r.u.begin(), r.u.end(), [&](double u) { return u == r.u.front(); });
    r.h_tilde = (equal_u || !(gap > 0)) ? inf : 1.0/std::sqrt(gap);
    if (equal_u) r.q_over_r_sq = n - 1;
    return r;
}

double h_star_weighted(const sample& s, const weight_spec& w) {
    return holder_ratio(s, w, 2.0);
}

double h_star_generalized(const sample& s, const weight_spec& w) {
    if (!(w.eta > 0) || !std::isfinite(w.eta)) {
        fail(errc::nonpositive_eta, "eta must be a positive finite number");
    }
    return holder_ratio(s, w, w.eta);
}

double h_star_from_moments(double m, double mean, double ss, double candidate) noexcept {
    if (!(ss > 0)) return inf;
    const double d = mean - candidate;
    return std::sqrt((ss + m*d*d)/m*(m - 1)/(2*ss));
}

double h_star_with_candidate(std::span<const double> ordinary, double candidate) noexcept {
    const double m = static_cast<double>(ordinary.size());
    double mean = 0;
    for (double v: ordinary) mean += v;
    mean /= m;
    double ss = 0;
    for (double v: ordinary) {
        double d = v - mean;
        ss += d*d;
    }
    return h_star_from_moments(m, mean, ss, candidate);
}

double h_star_of_max(std::span<const double> values) noexcept {
    const std::size_t n = values.size();
    std::size_t imax = 0;
    double sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sum += values[k];
        if (values[k] > values[imax]) imax = k;
    }
    const double cand = values[imax];
    const double m = static_cast<double>(n - 1);
    const double mean = (sum - cand)/m;
    double ss = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == imax) continue;
        double d = values[k] - mean;
        ss += d*d;
    }
    return h_star_from_moments(m, mean, ss, cand);
}

} // namespace hstar
