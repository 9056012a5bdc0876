#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace hstar {

enum class side { max, min };

const char* to_string(side s) noexcept;

// Observations plus the extreme that holds the candidate outlier.
struct sample {
    std::vector<double> values;
    side extreme = side::max;
};

// Throws too_few_observations (n < 4) or non_finite_value.
void validate(const sample& s);

struct hstar_outcome {
    double h_star = 0;
    double h_tilde = 0;
    int n = 0;
    int nu = 0;
    double q_over_r_sq = 0;
    // On the caller's scale, not negated for side::min.
    double candidate_value = 0;
    std::size_t candidate_index = 0;
    // All ordinary values equal; h_star is +inf.
    bool degenerate = false;
};

// Direct transcription of the rms-ratio definition: O(n^2) pairwise loop.
hstar_outcome h_star_definitional(const sample& s);

// Sum-of-squares form, accumulated on mean-shifted values.
hstar_outcome h_star_algebraic(const sample& s);

struct difference_space_result {
    // U_k = X* - X_(k-1) over the ascending ordinary order statistics,
    // largest difference first.
    std::vector<double> u;
    double q = 0;
    double r2 = 0;
    double q_over_r_sq = 0;
    double h_tilde = 0;
};

difference_space_result difference_space(const sample& s);

enum class pair_rule { geometric_mean, explicit_matrix };

struct weight_spec {
    // One weight per entry of sample::values; the candidate's own entry is
    // ignored.
    std::vector<double> candidate_weights;
    pair_rule rule = pair_rule::geometric_mean;
    // Row-major n x n, used when rule == explicit_matrix.
    std::vector<double> pair_weights;
    double eta = 2.0;
};

double h_star_weighted(const sample& s, const weight_spec& w);

// Holder-mean generalisation on |X_i - X_j|^eta.
double h_star_generalized(const sample& s, const weight_spec& w);

// Simulation kernels. No validation, no allocation.

// h* with the maximum of `values` as candidate. Returns +inf when the
// remaining values are all equal.
double h_star_of_max(std::span<const double> values) noexcept;

// h* of ordinary values plus an explicit candidate (assumed >= all of them).
double h_star_with_candidate(std::span<const double> ordinary, double candidate) noexcept;

// h* from ordinary-sample moments: m points with mean `mean` and centred sum
// of squares `ss`, candidate `candidate`.
double h_star_from_moments(double m, double mean, double ss, double candidate) noexcept;

inline double h_tilde_from(double h_star, int n) noexcept {
    return std::sqrt(2.0 / (n - 2)) * h_star;
}

} // namespace hstar
