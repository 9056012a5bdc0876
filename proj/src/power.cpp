#include "hstar/power.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "hstar/core_stat.hpp"
#include "hstar/distributions.hpp"
#include "hstar/error.hpp"
#include "parallel.hpp"

namespace hstar {

std::vector<int> default_power_sizes() {
    std::vector<int> ns;
    for (int n = 4; n <= 32; ++n) ns.push_back(n);
    for (int n = 42; n <= 102; n += 10) ns.push_back(n);
    return ns;
}

std::vector<int> log_spaced_sizes(int lo, int hi, int count) {
    if (lo < 4 || hi < lo || count < 2) fail(errc::invalid_argument, "need 4 <= lo <= hi and count >= 2");
    std::vector<int> out;
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i)/(count - 1);
        const int n = static_cast<int>(std::lround(std::exp(std::log(lo) + t*(std::log(hi) - std::log(lo)))));
        if (out.empty() || n > out.back()) out.push_back(n);
    }
    return out;
}

std::vector<power_point> power_curve(const power_spec& spec, null_source& nulls) {
    for (double d: spec.effects) {
        if (!(d >= 0) || !std::isfinite(d)) fail(errc::invalid_argument, "effect sizes must be finite and >= 0");
    }
    for (double c: spec.confidence_levels) {
        if (!(c > 0 && c < 1)) fail(errc::invalid_argument, "confidence levels must lie in (0, 1)");
    }
    for (int n: spec.sizes) {
        if (n < 4) fail(errc::too_few_observations, "power sizes must be at least 4");
    }
    if (spec.trials < 1) fail(errc::invalid_argument, "trials must be positive");

    const auto prior = distribution_spec::normal(0, 1);
    const std::size_t ne = spec.effects.size(), nc = spec.confidence_levels.size();
    std::vector<power_point> out;
    for (int n: spec.sizes) {
        std::vector<double> crit(nc);
        for (std::size_t c = 0; c < nc; ++c) crit[c] = nulls.critical_value(prior, n, 1 - spec.confidence_levels[c]);

        const unsigned slots = detail::resolve_threads(spec.threads, spec.trials);
        std::vector<std::vector<std::uint64_t>> hits(slots, std::vector<std::uint64_t>(ne*nc, 0));
        detail::for_slices(spec.trials, slots, [&](unsigned slot, std::uint64_t first, std::uint64_t count) {
            std::vector<double> base(static_cast<std::size_t>(n)), buf(base.size());
            auto& h = hits[slot];
            for (std::uint64_t t = first; t < first + count; ++t) {
                rng g = derive(stream_key(spec.seed, static_cast<std::uint64_t>(n)), t);
                for (auto& x: base) x = standard_normal(g);
                for (std::size_t e = 0; e < ne; ++e) {
                    buf = base;
                    buf[0] += spec.effects[e];
                    const double hs = h_star_of_max(buf);
                    for (std::size_t c = 0; c < nc; ++c) h[e*nc + c] += hs > crit[c];
                }
            }
        });
        for (std::size_t e = 0; e < ne; ++e) {
            for (std::size_t c = 0; c < nc; ++c) {
                std::uint64_t k = 0;
                for (const auto& h: hits) k += h[e*nc + c];
                out.push_back({spec.effects[e], spec.confidence_levels[c], n,
                               static_cast<double>(k)/static_cast<double>(spec.trials)});
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.effect != b.effect ? a.effect < b.effect : a.confidence < b.confidence;
    });
    return out;
}

std::vector<accumulation_point> accumulation_study(const accumulation_spec& spec, null_source& nulls) {
    const auto& sched = spec.schedule;
    if (sched.empty()) fail(errc::invalid_argument, "empty schedule");
    if (sched.front() < 4) fail(errc::too_few_observations, "schedule sizes must be at least 4");
    for (std::size_t i = 1; i < sched.size(); ++i) {
        if (sched[i] <= sched[i - 1]) fail(errc::invalid_argument, "schedule must be strictly increasing");
    }
    if (!std::isfinite(spec.effect)) fail(errc::invalid_argument, "effect size must be finite");
    if (spec.trials < 2) fail(errc::invalid_argument, "at least 2 trials are needed");
    // Surface an infeasible truncation before any work.
    truncated_normal_quantile(spec.effect, 0, 0.5);

    const auto prior = distribution_spec::normal(0, 1);
    const std::size_t ns = sched.size();
    std::vector<double> crit(ns);
    for (std::size_t j = 0; j < ns; ++j) crit[j] = nulls.critical_value(prior, sched[j], spec.alpha);

    struct acc {
        std::vector<double> sum_h, sum_h2, sum_t;
        std::vector<std::uint64_t> hits;
    };
    const unsigned slots = detail::resolve_threads(spec.threads, spec.trials);
    std::vector<acc> parts(slots, acc{std::vector<double>(ns), std::vector<double>(ns), std::vector<double>(ns),
                                      std::vector<std::uint64_t>(ns)});
    detail::for_slices(spec.trials, slots, [&](unsigned slot, std::uint64_t first, std::uint64_t count) {
        auto& a = parts[slot];
        for (std::uint64_t t = first; t < first + count; ++t) {
            rng g = derive(spec.seed, t);
            const double excess = truncated_normal_quantile(spec.effect, 0, g.uniform_open());
            // Welford running moments of the ordinary sample.
            double mean = 0, m2 = 0, mx = -std::numeric_limits<double>::infinity();
            int m = 0;
            for (std::size_t j = 0; j < ns; ++j) {
                while (m < sched[j] - 1) {
                    const double x = standard_normal(g);
                    ++m;
                    const double d = x - mean;
                    mean += d/m;
                    m2 += d*(x - mean);
                    mx = std::max(mx, x);
                }
                const double h = h_star_from_moments(m, mean, m2, mx + excess);
                a.sum_h[j] += h;
                a.sum_h2[j] += h*h;
                a.sum_t[j] += h_tilde_from(h, sched[j]);
                a.hits[j] += h > crit[j];
            }
        }
    });

    std::vector<accumulation_point> out(ns);
    const double T = static_cast<double>(spec.trials);
    for (std::size_t j = 0; j < ns; ++j) {
        double sh = 0, sh2 = 0, st = 0;
        std::uint64_t k = 0;
        for (const auto& a: parts) {
            sh += a.sum_h[j];
            sh2 += a.sum_h2[j];
            st += a.sum_t[j];
            k += a.hits[j];
        }
        auto& p = out[j];
        p.n = sched[j];
        p.mean_h = sh/T;
        p.sd_h = std::sqrt(std::max(0.0, (sh2 - T*p.mean_h*p.mean_h)/(T - 1)));
        p.mean_h_tilde = st/T;
        p.power = static_cast<double>(k)/T;
    }
    return out;
}

const char* to_string(x_transform t) noexcept {
    switch (t) {
    case x_transform::log10_n: return "log10_n";
    case x_transform::sqrt_n: return "sqrt_n";
    case x_transform::log_n: return "log_n";
    }
    return "?";
}

regression_summary ols(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) fail(errc::invalid_argument, "x and y differ in length");
    const std::size_t p = x.size();
    if (p < 5) fail(errc::degenerate_design, std::to_string(p) + " points in the window; at least 5 are needed");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < p; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= p;
    my /= p;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < p; ++i) {
        sxx += (x[i] - mx)*(x[i] - mx);
        sxy += (x[i] - mx)*(y[i] - my);
        syy += (y[i] - my)*(y[i] - my);
    }
    if (!(sxx > 0)) fail(errc::degenerate_design, "x is constant over the window");
    regression_summary r;
    r.points = p;
    r.slope = sxy/sxx;
    r.intercept = my - r.slope*mx;
    double sse = 0;
    for (std::size_t i = 0; i < p; ++i) {
        const double e = y[i] - r.intercept - r.slope*x[i];
        sse += e*e;
    }
    r.r2 = syy > 0 ? 1 - sse/syy : 1;
    r.adjusted_r2 = 1 - (1 - r.r2)*static_cast<double>(p - 1)/static_cast<double>(p - 2);
    return r;
}

namespace {

double transform(x_transform t, int n) {
    switch (t) {
    case x_transform::log10_n: return std::log10(n);
    case x_transform::sqrt_n: return std::sqrt(n);
    case x_transform::log_n: return std::log(n);
    }
    return n;
}

} // namespace

regression_summary regress(const std::vector<accumulation_point>& pts, x_transform t, window w) {
    std::vector<double> x, y;
    for (const auto& p: pts) {
        if (p.n >= w.lo && p.n <= w.hi) {
            x.push_back(transform(t, p.n));
            y.push_back(p.mean_h);
        }
    }
    return ols(x, y);
}

regression_summary power_law(const std::vector<accumulation_point>& pts, window w) {
    std::vector<double> x, y;
    for (const auto& p: pts) {
        if (p.n >= w.lo && p.n <= w.hi) {
            x.push_back(std::log(p.n));
            y.push_back(std::log(p.mean_h_tilde));
        }
    }
    return ols(x, y);
}

void write_power_csv(std::ostream& os, const std::vector<power_point>& pts) {
    os << "effect,cl,n,power\n";
    char buf[96];
    for (const auto& p: pts) {
        std::snprintf(buf, sizeof buf, "%g,%g,%d,%.4f\n", p.effect, p.confidence, p.n, p.power);
        os << buf;
    }
}

void write_accumulation_csv(std::ostream& os, double effect, const std::vector<accumulation_point>& pts,
                            bool header) {
    if (header) os << "effect,n,mean_h,sd_h,mean_htilde\n";
    char buf[128];
    for (const auto& p: pts) {
        std::snprintf(buf, sizeof buf, "%g,%d,%.6f,%.6f,%.6f\n", effect, p.n, p.mean_h, p.sd_h, p.mean_h_tilde);
        os << buf;
    }
}

} // namespace hstar
