#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hstar/null_cache.hpp"
#include "hstar/rng.hpp"

namespace hstar {

// 4..32, then 42..102 in steps of 10.
std::vector<int> default_power_sizes();

struct power_spec {
    std::vector<double> effects{1.7, 3.7, 6.6};
    std::vector<double> confidence_levels{.90, .95, .99};
    std::vector<int> sizes = default_power_sizes();
    std::uint64_t trials = 10000;
    seed_t seed = 1;
    unsigned threads = 0;
};

struct power_point {
    double effect = 0;
    double confidence = 0;
    int n = 0;
    double power = 0;
};

// Each trial draws n - 1 standard normals and one N(delta, 1); the sample
// maximum is the candidate. All effects share the same draws.
std::vector<power_point> power_curve(const power_spec& spec, null_source& nulls);

// Up to `count` distinct log-spaced sizes from lo to hi.
std::vector<int> log_spaced_sizes(int lo, int hi, int count);

struct accumulation_spec {
    double effect = 1.7;
    std::vector<int> schedule = log_spaced_sizes(4, 1000, 40);
    std::uint64_t trials = 1000;
    seed_t seed = 1;
    double alpha = 0.05;
    unsigned threads = 0;
};

struct accumulation_point {
    int n = 0;
    double mean_h = 0;
    double sd_h = 0;
    double mean_h_tilde = 0;
    double power = 0;
};

// The ordinary sample grows along the schedule. The outlier sits above the
// running ordinary maximum by an excess drawn once per trial from N(delta, 1)
// truncated to (0, inf), so it exceeds the ordinary data at every size.
std::vector<accumulation_point> accumulation_study(const accumulation_spec& spec, null_source& nulls);

enum class x_transform { log10_n, sqrt_n, log_n };

const char* to_string(x_transform t) noexcept;

struct regression_summary {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    double adjusted_r2 = 0;
    std::size_t points = 0;
};

// Ordinary least squares. Throws degenerate_design with fewer than 5 points
// or constant x.
regression_summary ols(const std::vector<double>& x, const std::vector<double>& y);

struct window {
    int lo = 20;
    int hi = 1 << 30;
};

// <h*> against transform(n) over the points with n in the window.
regression_summary regress(const std::vector<accumulation_point>& pts, x_transform t, window w = {});

// log <h~*> against log n: the slope is the exponent beta of alpha n^beta.
regression_summary power_law(const std::vector<accumulation_point>& pts, window w = {});

// `effect,cl,n,power`
void write_power_csv(std::ostream& os, const std::vector<power_point>& pts);
// `effect,n,mean_h,sd_h,mean_htilde`
void write_accumulation_csv(std::ostream& os, double effect, const std::vector<accumulation_point>& pts,
                            bool header = true);

} // namespace hstar
