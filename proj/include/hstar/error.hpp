#pragma once

#include <stdexcept>
#include <string>

namespace hstar {

enum class errc {
    too_few_observations,
    all_values_identical,
    non_finite_value,
    zero_weight_mass,
    nonpositive_eta,
    invalid_spec,
    nonpositive_value_for_lognormal,
    insufficient_tail_mass,
    malformed_table_file,
    fit_rejected,
    too_few_ordinary,
    truncation_infeasible,
    degenerate_design,
    out_of_support,
    degenerate_normalizer,
    too_few_pairs,
    all_zero_differences,
    no_pretest_outliers,
    invalid_counts,
    parse_error,
    empty_column,
    invalid_argument,
};

const char* to_string(errc code) noexcept;

// Procedure errors are the ones a statistically valid input can still hit
// (fit rejected, no outliers to pair); everything else is a data error.
bool is_procedure_error(errc code) noexcept;

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
    throw error(code, std::string(to_string(code)) + ": " + what);
}

} // namespace hstar
