#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hstar/distributions.hpp"
#include "hstar/rng.hpp"

namespace hstar {

inline constexpr double h_star_floor = 0.70710678118654752440; // 1/sqrt(2)
inline constexpr double default_bin_width = 0.0025;

// Default upper end of the binned range; larger values are kept exactly.
double default_cap(dist_kind kind) noexcept;

struct simulation_options {
    double bin_width = default_bin_width;
    // <= 0 selects default_cap(prior.kind).
    double cap = 0;
    // 0 selects std::thread::hardware_concurrency().
    unsigned threads = 0;
};

// Binned empirical law of h* under a prior for sample size n.
class null_distribution {
public:
    null_distribution() = default;
    null_distribution(distribution_spec prior, int n, double bin_width, double cap, seed_t seed);

    const distribution_spec& prior() const noexcept { return prior_; }
    int n() const noexcept { return n_; }
    int nu() const noexcept { return n_ - 2; }
    double bin_width() const noexcept { return bin_width_; }
    double bin_origin() const noexcept { return h_star_floor; }
    double cap() const noexcept { return cap_; }
    seed_t seed() const noexcept { return seed_; }
    std::uint64_t total() const noexcept { return total_; }

    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    // Finite values at or above cap, ascending once finalised.
    const std::vector<double>& spill() const noexcept { return spill_; }
    // Degenerate samples (h* = +inf).
    std::uint64_t infinite() const noexcept { return infinite_; }

    double bin_left(std::size_t i) const noexcept { return h_star_floor + static_cast<double>(i)*bin_width_; }
    double bin_right(std::size_t i) const noexcept { return bin_left(i + 1); }

    void add(double h);
    // Associative, order-independent count sum; metadata must match.
    void merge(const null_distribution& other);
    // Sorts the spill list. Idempotent.
    void finalise();

    // Empirical P(h* <= h), right-continuous at bin edges.
    double cdf(double h) const;
    // Probability mass of each bin, for tests and plotting.
    std::vector<double> bin_masses() const;

    bool same_layout(const null_distribution& other) const noexcept;

    // Rebuilds from persisted state.
    static null_distribution restore(distribution_spec prior, int n, double bin_width, double cap,
                                     seed_t seed, std::vector<std::uint64_t> counts,
                                     std::vector<double> spill, std::uint64_t infinite);

private:
    distribution_spec prior_{};
    int n_ = 0;
    double bin_width_ = default_bin_width;
    double cap_ = 0;
    seed_t seed_ = 0;
    std::vector<std::uint64_t> counts_;
    std::vector<double> spill_;
    std::uint64_t infinite_ = 0;
    std::uint64_t total_ = 0;
};

// Trials [first, first + count) of the simulation; trial t draws its n
// variates from derive(seed, t), so any partition merges to the same counts.
null_distribution simulate_null_chunk(const distribution_spec& prior, int n, std::uint64_t first,
                                      std::uint64_t count, seed_t seed,
                                      const simulation_options& opts = {});

null_distribution simulate_null(const distribution_spec& prior, int n, std::uint64_t trials, seed_t seed,
                                const simulation_options& opts = {});

// Smallest bin right edge h with empirical P(h* > h) <= alpha.
double critical_value(const null_distribution& null, double alpha);

// Empirical P(h* >= h_obs), counting the whole bin that holds h_obs.
double p_value(const null_distribution& null, double h_obs);

// Seed of the null for (prior, n) derived from a run seed.
seed_t null_seed(seed_t run_seed, const distribution_spec& prior, int n);

// Null-distribution cache file: two comment headers and `h_bin_left,count`
// rows; rows at or above cap carry exact spilled values.
void write_null(std::ostream& os, const null_distribution& null);
null_distribution read_null(std::istream& is);

inline const std::vector<double>& standard_levels() {
    static const std::vector<double> levels{.40, .30, .20, .15, .10, .05, .02, .01, .002, .001};
    return levels;
}

struct table_row {
    int n = 0;
    int nu = 0;
    // Aligned with critical_value_table::levels.
    std::vector<double> h_crit;

    bool operator==(const table_row&) const = default;
};

struct critical_value_table {
    std::string prior = "normal";
    std::uint64_t sims = 0;
    std::optional<seed_t> seed;
    double bin_width = default_bin_width;
    std::vector<double> levels = standard_levels();
    std::vector<table_row> rows;

    const table_row* row(int n) const;
    double at(int n, double alpha) const;

    bool operator==(const critical_value_table&) const = default;
};

// Critical values rounded to the 4 printed decimals.
critical_value_table build_table(const distribution_spec& prior, const std::vector<int>& ns,
                                 const std::vector<double>& levels, std::uint64_t trials, seed_t seed,
                                 const simulation_options& opts = {});

// Format: `# prior=<kind>, sims=<N>, seed=<S>, bin=<w>` then
// `n,nu,alpha,h_crit` rows with 4-decimal h_crit.
void write_table(std::ostream& os, const critical_value_table& table);
critical_value_table read_table(std::istream& is);
void save_table(const std::string& path, const critical_value_table& table);
critical_value_table load_table(const std::string& path);

} // namespace hstar
