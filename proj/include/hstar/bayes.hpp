#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hstar/core_stat.hpp"
#include "hstar/rng.hpp"

namespace hstar {

struct bayes_spec {
    // Scale of the half-normal effect-size prior.
    double tau = 5;
    // Composite trapezoid rule on [0, span*tau] with this many intervals.
    int delta_intervals = 64;
    double delta_span = 4;
    // Midpoint rule in theta after pi = sin^2(theta).
    int pi_nodes = 128;
    std::uint64_t trials = 100000;
    seed_t seed = 1;
    unsigned threads = 0;
    double bin_width = 0.0025;
    // Per-bin smoothing mass; <= 0 selects 1/(10 trials).
    double epsilon = 0;
    // Add the no-outlier outcome to the combined-posterior normaliser.
    bool include_all_zero = false;
};

void validate(const bayes_spec& spec);

// Binned laws of h* for standard-normal ordinary data of size n (n - 1
// ordinary points plus one point shifted by delta).
class likelihood_tables {
public:
    int n() const noexcept { return n_; }
    double bin_width() const noexcept { return width_; }
    double cap() const noexcept { return cap_; }
    std::size_t bins() const noexcept { return p0_.size(); }
    std::uint64_t trials() const noexcept { return trials_; }
    const std::vector<double>& deltas() const noexcept { return deltas_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    // Smoothed bin probabilities; the last bin pools everything >= cap.
    const std::vector<double>& l0() const noexcept { return p0_; }
    std::vector<double> l1(std::size_t node) const;
    // Half-normal mixture over the delta nodes.
    const std::vector<double>& l1_marginal() const noexcept { return p1_; }

    // Bin holding h; throws out_of_support below 1/sqrt(2).
    std::size_t bin_of(double h) const;

    // Densities after pooling adjacent bins until p1/p0 is nondecreasing.
    const std::vector<double>& pooled_l0() const noexcept { return pooled0_; }
    const std::vector<double>& pooled_l1() const noexcept { return pooled1_; }

    double epsilon() const noexcept { return eps_; }
    // Same simulated counts, different smoothing mass.
    likelihood_tables resmoothed(double epsilon) const;

    friend likelihood_tables build_likelihood_tables(int n, const bayes_spec& spec);

private:
    int n_ = 0;
    double width_ = 0;
    double cap_ = 0;
    std::uint64_t trials_ = 0;
    double eps_ = 0;
    std::vector<double> deltas_, weights_;
    void smooth(double epsilon);

    std::vector<std::uint32_t> counts0_;
    // Raw L1 counts, node-major.
    std::vector<std::uint32_t> counts1_;
    std::vector<double> p0_, p1_;
    std::vector<double> pooled0_, pooled1_;
};

likelihood_tables build_likelihood_tables(int n, const bayes_spec& spec);

struct marginal_result {
    // Densities P(h|L=1) and P(h|L=0).
    double l1 = 0;
    double l0 = 0;
};

// pooled = false reads the single bin; the default reads the monotone-ratio
// pooled estimate used for posteriors.
marginal_result marginal_likelihood(double h, const likelihood_tables& t, bool pooled = true);

// P(L=1 | h) from the two likelihoods, integrated over pi ~ Beta(1/2, 1/2).
double posterior_from_likelihoods(double l1, double l0, int pi_nodes = 128);

double posterior(double h, const likelihood_tables& t, const bayes_spec& spec);

struct combined_result {
    double combined = 0;
    // Normaliser over the threshold outcomes.
    double k = 0;
};

// posteriors[0] is the most extreme candidate. Outcome m (m = 1..n') marks
// the m most extreme candidates as outliers.
combined_result combined_posterior(std::span<const double> posteriors, bool include_all_zero = false);

struct candidate_posterior {
    std::size_t index = 0;
    long long id = 0;
    double h_star = 0;
    double l1 = 0;
    double l0 = 0;
    double posterior = 0;
    // Posterior with the smoothing mass divided and multiplied by 10.
    double posterior_eps_low = 0;
    double posterior_eps_high = 0;
};

struct posterior_result {
    side extreme = side::max;
    int n = 0;
    int n_prime = 0;
    bool log_transform = false;
    double epsilon = 0;
    std::vector<candidate_posterior> candidates;
    combined_result combined;
    std::vector<std::string> notices;
};

// Selects the n_prime extrema, standardises by the ordinary mean and sd, and
// evaluates each candidate against tables for size n - n_prime + 1.
posterior_result bayes_analysis(std::span<const double> data, int n_prime, side extreme, bool log_transform,
                                const bayes_spec& spec, std::span<const long long> ids = {});

} // namespace hstar
