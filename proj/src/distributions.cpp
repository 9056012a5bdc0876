#include "hstar/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "hstar/error.hpp"

namespace hstar {

namespace {

const boost::math::normal_distribution<double> std_normal(0.0, 1.0);

double round4(double x) { return std::round(x*1e4)/1e4; }

std::pair<double, double> mean_sd(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0)/n;
    double ss = 0;
    for (double x: v) ss += (x - mean)*(x - mean);
    return {mean, std::sqrt(ss/(n - 1))};
}

// ln Phi(z) and ln(1 - Phi(z)) without underflow in either tail.
double log_cdf(double z) {
    double c = normal_cdf(z);
    return c > 0 ? std::log(c) : -0.5*z*z - std::log(-z) - 0.5*std::log(2*std::numbers::pi);
}

double log_sf(double z) { return log_cdf(-z); }

} // namespace

const char* to_string(dist_kind k) noexcept {
    switch (k) {
    case dist_kind::normal: return "normal";
    case dist_kind::lognormal: return "lognormal";
    case dist_kind::truncated_normal: return "truncated_normal";
    }
    return "unknown";
}

dist_kind parse_dist_kind(const std::string& s) {
    if (s == "normal") return dist_kind::normal;
    if (s == "lognormal" || s == "log-normal") return dist_kind::lognormal;
    if (s == "truncated_normal" || s == "truncated-normal") return dist_kind::truncated_normal;
    fail(errc::invalid_spec, "unknown distribution kind '" + s + "'");
}

void validate(const distribution_spec& spec) {
    if (!(spec.sigma > 0) || !std::isfinite(spec.sigma)) {
        fail(errc::invalid_spec, describe(spec) + ": sigma must be positive and finite");
    }
    if (!std::isfinite(spec.mu)) fail(errc::invalid_spec, "location must be finite");
    if (spec.kind == dist_kind::truncated_normal && !std::isfinite(spec.lower)) {
        fail(errc::invalid_spec, "truncation bound must be finite");
    }
}

distribution_spec standardized(const distribution_spec& spec) {
    validate(spec);
    switch (spec.kind) {
    case dist_kind::normal:
        return distribution_spec::normal(0, 1);
    case dist_kind::lognormal:
        // Rounded so nearby fits share one cached null distribution.
        return distribution_spec::lognormal(0, round4(spec.sigma));
    case dist_kind::truncated_normal:
        return distribution_spec::truncated_normal(0, 1, round4((spec.lower - spec.mu)/spec.sigma));
    }
    return spec;
}

std::string describe(const distribution_spec& spec) {
    char buf[128];
    if (spec.kind == dist_kind::truncated_normal) {
        std::snprintf(buf, sizeof buf, "truncated_normal(%g,%g,%g)", spec.mu, spec.sigma, spec.lower);
    }
    else {
        std::snprintf(buf, sizeof buf, "%s(%g,%g)", to_string(spec.kind), spec.mu, spec.sigma);
    }
    return buf;
}

distribution_spec parse_distribution(const std::string& text) {
    const auto open = text.find('(');
    if (open == std::string::npos) {
        auto kind = parse_dist_kind(text);
        return kind == dist_kind::truncated_normal ? distribution_spec::truncated_normal(0, 1, 0)
                                                   : distribution_spec{kind, 0, 1, 0};
    }
    if (text.back() != ')') fail(errc::invalid_spec, "bad distribution '" + text + "'");
    distribution_spec spec;
    spec.kind = parse_dist_kind(text.substr(0, open));
    std::vector<double> args;
    std::size_t pos = open + 1;
    while (pos < text.size() - 1) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size() - 1;
        try {
            args.push_back(std::stod(text.substr(pos, comma - pos)));
        }
        catch (const std::exception&) {
            fail(errc::invalid_spec, "bad distribution parameter in '" + text + "'");
        }
        pos = comma + 1;
    }
    const std::size_t want = spec.kind == dist_kind::truncated_normal ? 3 : 2;
    if (args.size() != want) fail(errc::invalid_spec, "wrong parameter count in '" + text + "'");
    spec.mu = args[0];
    spec.sigma = args[1];
    if (want == 3) spec.lower = args[2];
    validate(spec);
    return spec;
}

double normal_cdf(double z) { return boost::math::cdf(std_normal, z); }

double normal_sf(double z) { return boost::math::cdf(boost::math::complement(std_normal, z)); }

double normal_quantile(double p) { return boost::math::quantile(std_normal, p); }

double truncated_normal_quantile(double mu, double lower, double u) {
    const double a = lower - mu;
    const double tail = normal_sf(a);
    if (!(tail > 1e-300)) {
        fail(errc::truncation_infeasible, "truncation bound " + std::to_string(a)
             + " standard deviations above the mean leaves no representable mass");
    }
    return mu + boost::math::quantile(boost::math::complement(std_normal, u*tail));
}

double draw(const distribution_spec& spec, rng& g) {
    switch (spec.kind) {
    case dist_kind::normal:
        return spec.mu + spec.sigma*standard_normal(g);
    case dist_kind::lognormal:
        return std::exp(spec.mu + spec.sigma*standard_normal(g));
    case dist_kind::truncated_normal: {
        const double z0 = (spec.lower - spec.mu)/spec.sigma;
        for (;;) {
            double z = truncated_normal_quantile(0, z0, g.uniform_open());
            // Rounding at u -> 1 can land on the bound itself.
            if (z > z0) {
                double x = spec.mu + spec.sigma*z;
                if (x > spec.lower) return x;
            }
        }
    }
    }
    return 0;
}

std::vector<double> draw_sample(const distribution_spec& spec, std::size_t count, seed_t seed) {
    validate(spec);
    if (count < 1) fail(errc::invalid_argument, "count must be at least 1");
    rng g = derive(seed, 0);
    std::vector<double> out(count);
    for (auto& x: out) x = draw(spec, g);
    return out;
}

const char* to_string(gof_test t) noexcept {
    switch (t) {
    case gof_test::anderson_darling: return "anderson-darling";
    case gof_test::lilliefors: return "lilliefors";
    case gof_test::kolmogorov_smirnov: return "kolmogorov-smirnov";
    }
    return "?";
}

gof_test parse_gof_test(const std::string& s) {
    if (s == "anderson-darling" || s == "ad") return gof_test::anderson_darling;
    if (s == "lilliefors" || s == "lks") return gof_test::lilliefors;
    if (s == "kolmogorov-smirnov" || s == "ks") return gof_test::kolmogorov_smirnov;
    fail(errc::invalid_argument, "unknown goodness-of-fit test '" + s + "'");
}

gof_result anderson_darling_normal(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 4) fail(errc::too_few_observations, "Anderson-Darling needs at least 4 values");
    auto [mean, sd] = mean_sd(values);
    if (!(sd > 0)) fail(errc::invalid_spec, "zero variance");

    std::vector<double> z(values.begin(), values.end());
    std::sort(z.begin(), z.end());
    for (auto& v: z) v = (v - mean)/sd;

    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        s += (2.0*i + 1)*(log_cdf(z[i]) + log_sf(z[n - 1 - i]));
    }
    const double dn = static_cast<double>(n);
    const double a2 = -dn - s/dn;
    // Case 3 (mean and variance estimated): D'Agostino & Stephens (1986),
    // table 4.9.
    const double a = a2*(1 + 0.75/dn + 2.25/(dn*dn));
    double p;
    if (a >= 0.6) p = std::exp(1.2937 - 5.709*a + 0.0186*a*a);
    else if (a >= 0.34) p = std::exp(0.9177 - 4.279*a - 1.38*a*a);
    else if (a >= 0.2) p = 1 - std::exp(-8.318 + 42.796*a - 59.938*a*a);
    else p = 1 - std::exp(-13.436 + 101.14*a - 223.73*a*a);
    return {a2, std::clamp(p, 0.0, 1.0)};
}

namespace {

// Largest gap between the empirical cdf and the fitted normal cdf.
double ks_distance(std::span<const double> values) {
    auto [mean, sd] = mean_sd(values);
    if (!(sd > 0)) fail(errc::invalid_spec, "zero variance");
    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    const double dn = static_cast<double>(x.size());
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = normal_cdf((x[i] - mean)/sd);
        d = std::max({d, (i + 1)/dn - f, f - i/dn});
    }
    return d;
}

} // namespace

gof_result kolmogorov_smirnov_normal(std::span<const double> values) {
    if (values.size() < 5) fail(errc::too_few_observations, "Kolmogorov-Smirnov test needs at least 5 values");
    const double d = ks_distance(values);
    return {d, kolmogorov_sf(std::sqrt(static_cast<double>(values.size()))*d)};
}

gof_result lilliefors_normal(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 5) fail(errc::too_few_observations, "Lilliefors test needs at least 5 values");
    const double d = ks_distance(values);
    const double dn = static_cast<double>(n);

    // Dallal & Wilkinson (1986) with Stephens' modification above p = 0.1.
    double kd = d, nd = dn;
    if (n > 100) {
        kd = d*std::pow(dn/100, 0.49);
        nd = 100;
    }
    double p = std::exp(-7.01256*kd*kd*(nd + 2.78019) + 2.99587*kd*std::sqrt(nd + 2.78019)
                        - 0.122119 + 0.974598/std::sqrt(nd) + 1.67997/nd);
    if (p > 0.1) {
        const double k = (std::sqrt(dn) - 0.01 + 0.85/std::sqrt(dn))*d;
        if (k <= 0.302) p = 1;
        else if (k <= 0.5) p = 2.76773 - 19.828315*k + 80.709644*k*k - 138.55152*k*k*k + 81.218052*k*k*k*k;
        else if (k <= 0.9) p = -4.901232 + 40.662806*k - 97.490286*k*k + 94.029866*k*k*k - 32.355711*k*k*k*k;
        else if (k <= 1.31) p = 6.198765 - 19.558097*k + 23.186922*k*k - 12.234627*k*k*k + 2.423045*k*k*k*k;
        else p = 0;
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

fit_diagnostics fit(std::span<const double> values, dist_kind kind, gof_test test) {
    if (values.size() < 4) fail(errc::too_few_observations, "fitting needs at least 4 values");
    if (kind == dist_kind::truncated_normal) {
        fail(errc::invalid_argument, "fitting supports normal and lognormal priors only");
    }
    std::vector<double> work(values.begin(), values.end());
    if (kind == dist_kind::lognormal) {
        for (auto& v: work) {
            if (!(v > 0)) fail(errc::nonpositive_value_for_lognormal, "value " + std::to_string(v));
            v = std::log(v);
        }
    }
    auto [mean, sd] = mean_sd(work);
    if (!(sd > 0)) fail(errc::invalid_spec, "constant data: fitted sigma is zero");

    fit_diagnostics out;
    out.fitted = kind == dist_kind::normal ? distribution_spec::normal(mean, sd)
                                           : distribution_spec::lognormal(mean, sd);
    out.test = test;
    gof_result g;
    switch (test) {
    case gof_test::anderson_darling: g = anderson_darling_normal(work); break;
    case gof_test::lilliefors: g = lilliefors_normal(work); break;
    case gof_test::kolmogorov_smirnov: g = kolmogorov_smirnov_normal(work); break;
    }
    out.gof_statistic = g.statistic;
    out.gof_p_value = g.p_value;

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    out.qq_points.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        // Blom plotting positions.
        double z = normal_quantile((i + 1 - 0.375)/(n + 0.25));
        double t = mean + sd*z;
        if (kind == dist_kind::lognormal) t = std::exp(t);
        out.qq_points.emplace_back(t, sorted[i]);
    }
    return out;
}

double kolmogorov_sf(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0, sign = 1;
    for (int j = 1; j <= 100; ++j) {
        double term = sign*std::exp(-2.0*j*j*lambda*lambda);
        sum += term;
        if (std::abs(term) < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2*sum, 0.0, 1.0);
}

double ks_two_sample_p(double d, double n1, double n2) {
    const double ne = std::sqrt(n1*n2/(n1 + n2));
    return kolmogorov_sf((ne + 0.12 + 0.11/ne)*d);
}

} // namespace hstar
