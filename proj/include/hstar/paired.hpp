#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hstar/iut.hpp"

namespace hstar {

// h* of inliers plus the subject, with the subject as candidate.
double per_subject_h(std::span<const double> inliers, double subject);

enum class wilcoxon_mode { normal_approx_cc, exact };

const char* to_string(wilcoxon_mode m) noexcept;
wilcoxon_mode parse_wilcoxon_mode(const std::string& s);

struct wilcoxon_result {
    // Sum of the ranks of positive differences x - y.
    double w = 0;
    // Pairs left after dropping zero differences.
    int n = 0;
    wilcoxon_mode mode = wilcoxon_mode::normal_approx_cc;
    double p_two_sided = 1;
    // Alternative x > y (large W).
    double p_greater = 1;
    // Continuity-corrected z for the approximation, 0 in exact mode.
    double z = 0;
};

// Zero differences are dropped and tied |differences| get midranks. The
// exact mode enumerates the signed-rank law (n <= 25).
wilcoxon_result wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y, wilcoxon_mode mode);

struct paired_spec {
    bool log_transform = true;
    double alpha = 0.05;
    int max_candidates = 7;
    std::vector<side> pre_sides{side::max};
    std::vector<side> post_sides{side::max, side::min};
    trial_spec trial{};
    wilcoxon_mode mode = wilcoxon_mode::normal_approx_cc;
    // The reported p: two-sided by default.
    bool one_sided = false;
};

struct paired_subject {
    long long id = 0;
    double h_pre = 0;
    double h_post = 0;
    // h_post above the alpha critical value for the same size.
    bool post_in_rejection_region = false;
};

struct paired_report {
    std::vector<long long> outlier_ids;
    scan_result pre_scan;
    scan_result post_scan;
    bool post_outliers_found = false;
    std::vector<paired_subject> subjects;
    // Both modes, when a test was possible.
    std::optional<wilcoxon_result> approx;
    std::optional<wilcoxon_result> exact;
    double p_reported = 1;
    bool significant = false;
    double alpha = 0.05;
    std::vector<std::string> notes;
};

// Scans the pretest for outliers, checks the posttest has none, evaluates
// each outlier's h* before and after against the remaining subjects, and
// runs the signed-rank test on the pairs.
paired_report paired_pipeline(std::span<const long long> ids, std::span<const double> pre,
                              std::span<const double> post, const paired_spec& spec, null_source& nulls);

nlohmann::json to_json(const wilcoxon_result& w);
nlohmann::json to_json(const paired_report& r);
std::string render_paired(const paired_report& r, bool json);

} // namespace hstar
