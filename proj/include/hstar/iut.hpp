#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hstar/core_stat.hpp"
#include "hstar/distributions.hpp"
#include "hstar/error.hpp"
#include "hstar/null_cache.hpp"

namespace hstar {

struct trial_spec {
    side extreme = side::max;
    // Number of candidate extrema.
    int n_prime = 1;
    dist_kind prior = dist_kind::normal;
    double alpha = 0.05;
    // Test log10 of the data.
    bool log_transform = false;
    gof_test gof = gof_test::anderson_darling;
    // Fit p below this withholds the decision.
    double fit_floor = 0.01;
    // Throw fit_rejected instead of withholding.
    bool strict_fit = false;

    bool operator==(const trial_spec&) const = default;
};

void validate(const trial_spec& spec);

enum class decision { reject, do_not_reject, withheld };

const char* to_string(decision d) noexcept;
decision parse_decision(const std::string& s);

struct candidate_result {
    // Position in the input, 0-based.
    std::size_t index = 0;
    // Caller-facing identifier (ids column, or index + 1).
    long long id = 0;
    // On the tested scale (log10 when log_transform), not negated.
    double value = 0;
    double h_star = 0;
    double p_value = 1;

    bool operator==(const candidate_result&) const = default;
};

struct trial_report {
    trial_spec spec;
    int n = 0;
    // Candidates actually used, after the tie rule.
    int n_prime = 0;
    int null_size = 0;
    fit_diagnostics fit;
    bool fit_rejected = false;
    std::vector<candidate_result> candidates;
    decision verdict = decision::do_not_reject;
    std::vector<std::string> notices;

    bool operator==(const trial_report&) const = default;
};

// The n' extrema on one side of the data, after the tie rule.
struct candidate_split {
    // Data on the tested scale (log10 when requested).
    std::vector<double> scale;
    // scale, negated for side::min so candidates are the largest values.
    std::vector<double> oriented;
    // Indices by decreasing oriented value; the first k are candidates.
    std::vector<std::size_t> order;
    int k = 0;
    std::vector<std::string> notices;

    std::vector<double> ordinary_oriented() const;
};

// Values tied with the last candidate join the candidate set (k grows, with
// a notice). Throws too_few_ordinary when fewer than 4 values remain.
candidate_split split_candidates(std::span<const double> data, int n_prime, side extreme, bool log_transform);

// ids, when given, label the values for reports and must align with data.
trial_report run_trial(std::span<const double> data, const trial_spec& spec, null_source& nulls,
                       std::span<const long long> ids = {});

enum class selection_rule { largest, smallest };

struct scan_entry {
    side extreme = side::max;
    int requested = 0;
    std::optional<trial_report> report;
    // Set when the trial failed.
    std::optional<errc> error_code;
    std::string error;
};

struct scan_result {
    std::vector<scan_entry> entries;
    // Index into entries of the selected trial per side, if any rejected.
    std::optional<std::size_t> selected_max;
    std::optional<std::size_t> selected_min;
    selection_rule rule = selection_rule::largest;
};

scan_result scan_trials(std::span<const double> data, int max_candidates, const std::vector<side>& sides,
                        const trial_spec& defaults, null_source& nulls, std::span<const long long> ids = {},
                        selection_rule rule = selection_rule::largest);

} // namespace hstar
