#include "hstar/error.hpp"

namespace hstar {

const char* to_string(errc code) noexcept {
    switch (code) {
    case errc::too_few_observations: return "TooFewObservations";
    case errc::all_values_identical: return "AllValuesIdentical";
    case errc::non_finite_value: return "NonFiniteValue";
    case errc::zero_weight_mass: return "ZeroWeightMass";
    case errc::nonpositive_eta: return "NonpositiveEta";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::nonpositive_value_for_lognormal: return "NonPositiveValueForLognormal";
    case errc::insufficient_tail_mass: return "InsufficientTailMass";
    case errc::malformed_table_file: return "MalformedTableFile";
    case errc::fit_rejected: return "FitRejected";
    case errc::too_few_ordinary: return "TooFewOrdinary";
    case errc::truncation_infeasible: return "TruncationInfeasible";
    case errc::degenerate_design: return "DegenerateDesign";
    case errc::out_of_support: return "OutOfSupport";
    case errc::degenerate_normalizer: return "DegenerateNormalizer";
    case errc::too_few_pairs: return "TooFewPairs";
    case errc::all_zero_differences: return "AllZeroDifferences";
    case errc::no_pretest_outliers: return "NoPretestOutliers";
    case errc::invalid_counts: return "InvalidCounts";
    case errc::parse_error: return "ParseError";
    case errc::empty_column: return "EmptyColumn";
    case errc::invalid_argument: return "InvalidArgument";
    }
    return "Unknown";
}

bool is_procedure_error(errc code) noexcept {
    switch (code) {
    case errc::fit_rejected:
    case errc::insufficient_tail_mass:
    case errc::truncation_infeasible:
    case errc::degenerate_design:
    case errc::degenerate_normalizer:
    case errc::no_pretest_outliers:
    case errc::too_few_pairs:
    case errc::all_zero_differences:
        return true;
    default:
        return false;
    }
}

} // namespace hstar
