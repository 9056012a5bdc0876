#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hstar/rng.hpp"

namespace hstar {

enum class dist_kind { normal, lognormal, truncated_normal };

const char* to_string(dist_kind k) noexcept;
dist_kind parse_dist_kind(const std::string& s);

// normal(mu, sigma); lognormal(mu, sigma) on the log scale;
// truncated_normal(mu, sigma) restricted to (lower, inf).
struct distribution_spec {
    dist_kind kind = dist_kind::normal;
    double mu = 0;
    double sigma = 1;
    double lower = 0;

    static distribution_spec normal(double mu, double sigma) { return {dist_kind::normal, mu, sigma, 0}; }
    static distribution_spec lognormal(double mu_log, double sigma_log) {
        return {dist_kind::lognormal, mu_log, sigma_log, 0};
    }
    static distribution_spec truncated_normal(double mu, double sigma, double lower) {
        return {dist_kind::truncated_normal, mu, sigma, lower};
    }

    bool operator==(const distribution_spec&) const = default;
};

// Throws invalid_spec.
void validate(const distribution_spec& spec);

// The affine-equivalent representative h* depends on: location removed and
// scale set to 1 for normal and truncated normal, log-location removed for
// lognormal.
distribution_spec standardized(const distribution_spec& spec);

std::string describe(const distribution_spec& spec);

// Inverse of describe(); a bare kind name means the standard member.
distribution_spec parse_distribution(const std::string& s);

// One variate. Truncated draws use inversion on the retained tail and throw
// truncation_infeasible when the tail mass underflows.
double draw(const distribution_spec& spec, rng& g);

// Deterministic in (spec, count, seed): draws come from derive(seed, 0).
std::vector<double> draw_sample(const distribution_spec& spec, std::size_t count, seed_t seed);

// Standard normal cdf, survival and quantile.
double normal_cdf(double z);
double normal_sf(double z);
double normal_quantile(double p);

// Quantile of N(mu, 1) truncated to (lower, inf) with upper-tail probability u
// in (0, 1). Working from the tail keeps far bounds accurate.
double truncated_normal_quantile(double mu, double lower, double u);

// kolmogorov_smirnov uses the plain asymptotic Kolmogorov p-value even
// though mean and sd are estimated, so it is lenient; lilliefors corrects
// for the estimation.
enum class gof_test { anderson_darling, lilliefors, kolmogorov_smirnov };

const char* to_string(gof_test t) noexcept;
gof_test parse_gof_test(const std::string& s);

struct gof_result {
    double statistic = 0;
    double p_value = 1;

    bool operator==(const gof_result&) const = default;
};

// Normality tests with mean and sd estimated from the data.
gof_result anderson_darling_normal(std::span<const double> values);
gof_result lilliefors_normal(std::span<const double> values);
gof_result kolmogorov_smirnov_normal(std::span<const double> values);

struct fit_diagnostics {
    distribution_spec fitted;
    gof_test test = gof_test::anderson_darling;
    double gof_statistic = 0;
    double gof_p_value = 1;
    // (theoretical quantile, sample quantile), ascending.
    std::vector<std::pair<double, double>> qq_points;

    bool operator==(const fit_diagnostics&) const = default;
};

// kind must be normal or lognormal.
fit_diagnostics fit(std::span<const double> values, dist_kind kind,
                    gof_test test = gof_test::anderson_darling);

// Asymptotic Kolmogorov survival function Q_KS(lambda).
double kolmogorov_sf(double lambda);

// Two-sample KS p-value for statistic d and sample sizes n1, n2.
double ks_two_sample_p(double d, double n1, double n2);

} // namespace hstar
