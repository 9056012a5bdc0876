#include "hstar/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hstar/error.hpp"
#include "hstar/iut.hpp"
#include "hstar/montecarlo.hpp"
#include "parallel.hpp"

namespace hstar {

namespace {

constexpr std::uint64_t l0_stream = 0xb0;
constexpr std::uint64_t l1_stream = 0xb1;

struct ordinary_moments {
    double mean = 0, ss = 0, max = 0;
    // Moments with the maximum removed.
    double mean_rest = 0, ss_rest = 0;
};

ordinary_moments moments_of(const std::vector<double>& o) {
    ordinary_moments m;
    const auto top = static_cast<std::size_t>(std::max_element(o.begin(), o.end()) - o.begin());
    m.max = o[top];
    double s = 0, s_rest = 0;
    for (std::size_t i = 0; i < o.size(); ++i) {
        s += o[i];
        if (i != top) s_rest += o[i];
    }
    m.mean = s/static_cast<double>(o.size());
    m.mean_rest = s_rest/static_cast<double>(o.size() - 1);
    for (std::size_t i = 0; i < o.size(); ++i) {
        m.ss += (o[i] - m.mean)*(o[i] - m.mean);
        if (i != top) m.ss_rest += (o[i] - m.mean_rest)*(o[i] - m.mean_rest);
    }
    return m;
}

// h* of the n - 1 ordinary points plus x, with the sample maximum as candidate.
double h_with_shifted(const ordinary_moments& m, double count, double x) {
    if (x >= m.max) return h_star_from_moments(count, m.mean, m.ss, x);
    // x joins the ordinary data and the old maximum becomes the candidate.
    const double d = x - m.mean_rest;
    const double mean = m.mean_rest + d/count;
    const double ss = m.ss_rest + d*(x - mean);
    return h_star_from_moments(count, mean, ss, m.max);
}

std::size_t bin_index(double h, double width, std::size_t bins) {
    if (std::isinf(h)) return bins - 1;
    const double pos = (h - h_star_floor)/width;
    if (pos <= 0) return 0;
    return std::min(static_cast<std::size_t>(pos), bins - 1);
}

} // namespace

void validate(const bayes_spec& s) {
    if (!(s.tau > 0) || !std::isfinite(s.tau)) fail(errc::invalid_argument, "tau must be positive");
    if (s.delta_intervals < 2) fail(errc::invalid_argument, "the delta grid needs at least 2 intervals");
    if (!(s.delta_span > 0)) fail(errc::invalid_argument, "the delta span must be positive");
    if (s.pi_nodes < 2) fail(errc::invalid_argument, "the pi rule needs at least 2 nodes");
    if (s.trials < 1000) fail(errc::invalid_argument, "likelihood tables need at least 1000 trials");
    if (!(s.bin_width > 0)) fail(errc::invalid_argument, "bin width must be positive");
}

std::vector<double> likelihood_tables::l1(std::size_t node) const {
    if (node >= deltas_.size()) fail(errc::invalid_argument, "no such delta node");
    const std::size_t B = p0_.size();
    const double T = static_cast<double>(trials_);
    std::vector<double> p(B);
    for (std::size_t b = 0; b < B; ++b) p[b] = (counts1_[node*B + b]/T + eps_)/(1 + B*eps_);
    return p;
}

std::size_t likelihood_tables::bin_of(double h) const {
    if (std::isnan(h) || h < h_star_floor - 1e-12) {
        fail(errc::out_of_support, "h* = " + std::to_string(h) + " is below 1/sqrt(2)");
    }
    return bin_index(h, width_, p0_.size());
}

likelihood_tables build_likelihood_tables(int n, const bayes_spec& spec) {
    validate(spec);
    if (n < 4) fail(errc::too_few_observations, "likelihood tables need n >= 4");
    const std::uint64_t T = spec.trials;
    const unsigned slots = detail::resolve_threads(spec.threads, T);

    // L = 0: plain null draws from a stream of their own.
    std::vector<double> h0(T);
    detail::for_slices(T, slots, [&](unsigned, std::uint64_t first, std::uint64_t count) {
        std::vector<double> buf(static_cast<std::size_t>(n));
        for (std::uint64_t t = first; t < first + count; ++t) {
            rng g = derive(stream_key(spec.seed, l0_stream), t);
            for (auto& x: buf) x = standard_normal(g);
            h0[t] = h_star_of_max(buf);
        }
    });
    double top = 0;
    for (double h: h0) {
        if (std::isfinite(h)) top = std::max(top, h);
    }

    likelihood_tables t;
    t.n_ = n;
    t.width_ = spec.bin_width;
    t.trials_ = T;
    // Binned range reaches past the whole L = 0 sample; the last bin pools
    // everything above.
    const double span = std::clamp(1.5*top, 10.0, 200.0) - h_star_floor;
    const auto B = static_cast<std::size_t>(std::ceil(span/spec.bin_width)) + 1;
    t.cap_ = h_star_floor + static_cast<double>(B - 1)*spec.bin_width;

    const int K = spec.delta_intervals + 1;
    const double step = spec.delta_span*spec.tau/spec.delta_intervals;
    double wsum = 0;
    for (int k = 0; k < K; ++k) {
        const double d = k*step;
        // Half-normal density 2 phi(d/tau)/tau.
        double w = 2*std::exp(-0.5*(d/spec.tau)*(d/spec.tau))/(spec.tau*std::sqrt(2*std::numbers::pi))*step;
        if (k == 0 || k == K - 1) w /= 2;
        t.deltas_.push_back(d);
        t.weights_.push_back(w);
        wsum += w;
    }
    // Renormalised so the truncated prior carries unit mass.
    for (auto& w: t.weights_) w /= wsum;

    std::vector<std::uint32_t> c0(B, 0);
    for (double h: h0) c0[bin_index(h, t.width_, B)]++;

    std::vector<std::vector<std::uint32_t>> parts(slots);
    detail::for_slices(T, slots, [&](unsigned slot, std::uint64_t first, std::uint64_t count) {
        auto& c = parts[slot];
        c.assign(static_cast<std::size_t>(K)*B, 0);
        std::vector<double> ord(static_cast<std::size_t>(n - 1));
        for (std::uint64_t tr = first; tr < first + count; ++tr) {
            rng g = derive(stream_key(spec.seed, l1_stream), tr);
            for (auto& x: ord) x = standard_normal(g);
            const double z0 = standard_normal(g);
            const auto m = moments_of(ord);
            // Common random numbers across the delta nodes.
            for (int k = 0; k < K; ++k) {
                const double h = h_with_shifted(m, n - 1, z0 + t.deltas_[k]);
                c[static_cast<std::size_t>(k)*B + bin_index(h, t.width_, B)]++;
            }
        }
    });
    t.counts1_ = std::move(parts[0]);
    for (unsigned s = 1; s < slots; ++s) {
        for (std::size_t i = 0; i < t.counts1_.size(); ++i) t.counts1_[i] += parts[s][i];
    }

    t.counts0_ = std::move(c0);
    t.smooth(spec.epsilon > 0 ? spec.epsilon : 1.0/(10.0*static_cast<double>(T)));
    return t;
}

likelihood_tables likelihood_tables::resmoothed(double epsilon) const {
    if (!(epsilon > 0)) fail(errc::invalid_argument, "epsilon must be positive");
    likelihood_tables t = *this;
    t.smooth(epsilon);
    return t;
}

void likelihood_tables::smooth(double epsilon) {
    eps_ = epsilon;
    const std::size_t B = counts0_.size(), K = deltas_.size();
    const double Td = static_cast<double>(trials_);
    const double norm = 1 + B*eps_;
    p0_.resize(B);
    p1_.assign(B, 0);
    for (std::size_t b = 0; b < B; ++b) p0_[b] = (counts0_[b]/Td + eps_)/norm;
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t b = 0; b < B; ++b) p1_[b] += weights_[k]*(counts1_[k*B + b]/Td + eps_)/norm;
    }

    // Pool adjacent violators of a nondecreasing p1/p0.
    struct block {
        double s1, s0;
        std::size_t first, last;
    };
    std::vector<block> st;
    for (std::size_t b = 0; b < B; ++b) {
        st.push_back({p1_[b], p0_[b], b, b});
        while (st.size() > 1) {
            auto& cur = st.back();
            auto& prev = st[st.size() - 2];
            if (prev.s1*cur.s0 <= cur.s1*prev.s0) break;
            prev.s1 += cur.s1;
            prev.s0 += cur.s0;
            prev.last = cur.last;
            st.pop_back();
        }
    }
    pooled0_.resize(B);
    pooled1_.resize(B);
    for (const auto& bl: st) {
        const double width = static_cast<double>(bl.last - bl.first + 1)*width_;
        for (std::size_t b = bl.first; b <= bl.last; ++b) {
            pooled0_[b] = bl.s0/width;
            pooled1_[b] = bl.s1/width;
        }
    }
}

marginal_result marginal_likelihood(double h, const likelihood_tables& t, bool pooled) {
    const auto b = t.bin_of(h);
    if (pooled) return {t.pooled_l1()[b], t.pooled_l0()[b]};
    return {t.l1_marginal()[b]/t.bin_width(), t.l0()[b]/t.bin_width()};
}

double posterior_from_likelihoods(double l1, double l0, int pi_nodes) {
    if (!(l1 >= 0) || !(l0 >= 0)) fail(errc::invalid_argument, "likelihoods must be nonnegative");
    if (pi_nodes < 2) fail(errc::invalid_argument, "the pi rule needs at least 2 nodes");
    if (l1 == 0 && l0 == 0) return 0.5;
    // With pi = sin^2(theta) the Beta(1/2, 1/2) measure becomes (2/pi) dtheta
    // on (0, pi/2); the midpoint rule then averages the integrand.
    const double h = std::numbers::pi/2/pi_nodes;
    double sum = 0;
    for (int i = 0; i < pi_nodes; ++i) {
        const double s = std::sin((i + 0.5)*h);
        const double p = s*s;
        const double a = p*l1, b = (1 - p)*l0;
        sum += a/(a + b);
    }
    return std::clamp(sum/pi_nodes, 0.0, 1.0);
}

double posterior(double h, const likelihood_tables& t, const bayes_spec& spec) {
    const auto m = marginal_likelihood(h, t);
    return posterior_from_likelihoods(m.l1, m.l0, spec.pi_nodes);
}

combined_result combined_posterior(std::span<const double> p, bool include_all_zero) {
    if (p.empty()) fail(errc::invalid_argument, "at least one candidate posterior is needed");
    for (double x: p) {
        if (!(x >= 0 && x <= 1)) fail(errc::invalid_argument, "posteriors must lie in [0, 1]");
    }
    const std::size_t np = p.size();
    auto outcome = [&](std::size_t m) {
        double prod = 1;
        for (std::size_t i = 0; i < np; ++i) prod *= i < m ? p[i] : 1 - p[i];
        return prod;
    };
    combined_result r;
    for (std::size_t m = 1; m <= np; ++m) r.k += outcome(m);
    if (include_all_zero) r.k += outcome(0);
    const double all = outcome(np);
    if (!(r.k > 1e-300)) fail(errc::degenerate_normalizer, "every threshold outcome has zero probability");
    r.combined = std::clamp(all/r.k, 0.0, 1.0);
    return r;
}

posterior_result bayes_analysis(std::span<const double> data, int n_prime, side extreme, bool log_transform,
                                const bayes_spec& spec, std::span<const long long> ids) {
    validate(spec);
    if (!ids.empty() && ids.size() != data.size()) fail(errc::invalid_argument, "ids and data differ in length");
    auto split = split_candidates(data, n_prime, extreme, log_transform);
    posterior_result r;
    r.extreme = extreme;
    r.n = static_cast<int>(data.size());
    r.n_prime = split.k;
    r.log_transform = log_transform;
    r.notices = split.notices;

    // h* is affine invariant, so standardising by the ordinary mean and sd
    // leaves it unchanged; tables are built for N(0, 1) ordinary data.
    const auto ordinary = split.ordinary_oriented();
    const auto tables = build_likelihood_tables(r.n - split.k + 1, spec);
    const auto low = tables.resmoothed(tables.epsilon()/10), high = tables.resmoothed(tables.epsilon()*10);
    r.epsilon = tables.epsilon();
    std::vector<double> ps;
    for (int i = 0; i < split.k; ++i) {
        const auto idx = split.order[i];
        candidate_posterior c;
        c.index = idx;
        c.id = ids.empty() ? static_cast<long long>(idx) + 1 : ids[idx];
        c.h_star = h_star_with_candidate(ordinary, split.oriented[idx]);
        const auto m = marginal_likelihood(c.h_star, tables);
        c.l1 = m.l1;
        c.l0 = m.l0;
        c.posterior = posterior_from_likelihoods(m.l1, m.l0, spec.pi_nodes);
        c.posterior_eps_low = posterior(c.h_star, low, spec);
        c.posterior_eps_high = posterior(c.h_star, high, spec);
        ps.push_back(c.posterior);
        r.candidates.push_back(c);
    }
    r.combined = combined_posterior(ps, spec.include_all_zero);
    return r;
}

} // namespace hstar
