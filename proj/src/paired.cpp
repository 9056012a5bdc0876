#include "hstar/paired.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "hstar/distributions.hpp"
#include "hstar/report.hpp"

namespace hstar {

double per_subject_h(std::span<const double> inliers, double subject) {
    if (inliers.size() < 4) fail(errc::too_few_observations, "at least 4 inliers are needed");
    for (double v: inliers) {
        if (!std::isfinite(v)) fail(errc::non_finite_value, "inlier value is not finite");
    }
    if (!std::isfinite(subject)) fail(errc::non_finite_value, "subject value is not finite");
    return h_star_with_candidate(inliers, subject);
}

const char* to_string(wilcoxon_mode m) noexcept {
    return m == wilcoxon_mode::exact ? "exact" : "normal_approx_cc";
}

wilcoxon_mode parse_wilcoxon_mode(const std::string& s) {
    if (s == "exact") return wilcoxon_mode::exact;
    if (s == "normal_approx_cc" || s == "approx") return wilcoxon_mode::normal_approx_cc;
    fail(errc::invalid_argument, "unknown Wilcoxon mode '" + s + "'");
}

wilcoxon_result wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y, wilcoxon_mode mode) {
    if (x.size() != y.size()) fail(errc::invalid_argument, "paired samples differ in length");
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) fail(errc::non_finite_value, "paired value is not finite");
        if (x[i] != y[i]) d.push_back(x[i] - y[i]);
    }
    if (!x.empty() && d.empty()) fail(errc::all_zero_differences, "every difference is zero");
    const int n = static_cast<int>(d.size());
    if (n < 5) fail(errc::too_few_pairs, std::to_string(n) + " nonzero differences; at least 5 are needed");
    if (mode == wilcoxon_mode::exact && n > 25) fail(errc::invalid_argument, "exact mode supports at most 25 pairs");

    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::abs(d[a]) < std::abs(d[b]); });
    // Doubled midranks stay integral.
    std::vector<int> rank2(d.size());
    double tie_term = 0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && std::abs(d[idx[j + 1]]) == std::abs(d[idx[i]])) ++j;
        const int r2 = static_cast<int>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) rank2[idx[k]] = r2;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t*t*t - t;
        i = j + 1;
    }
    int w2 = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] > 0) w2 += rank2[i];
    }

    wilcoxon_result r;
    r.w = w2/2.0;
    r.n = n;
    r.mode = mode;
    const double mean = n*(n + 1)/4.0;
    if (mode == wilcoxon_mode::normal_approx_cc) {
        const double var = n*(n + 1)*(2.0*n + 1)/24.0 - tie_term/48.0;
        const double sd = std::sqrt(var);
        r.z = std::max(0.0, std::abs(r.w - mean) - 0.5)/sd;
        if (r.w < mean) r.z = -r.z;
        r.p_two_sided = std::min(1.0, 2*normal_sf(std::abs(r.z)));
        r.p_greater = normal_sf((r.w - mean - 0.5)/sd);
        return r;
    }
    // Distribution of the doubled statistic over all 2^n sign patterns.
    int total2 = 0;
    for (int v: rank2) total2 += v;
    std::vector<double> ways(static_cast<std::size_t>(total2) + 1, 0);
    ways[0] = 1;
    int reach = 0;
    for (int v: rank2) {
        for (int s = reach; s >= 0; --s) {
            if (ways[s] != 0) ways[s + v] += ways[s];
        }
        reach += v;
    }
    const double all = std::ldexp(1.0, n);
    double ge = 0, le = 0;
    for (int s = 0; s <= total2; ++s) {
        if (s >= w2) ge += ways[s];
        if (s <= w2) le += ways[s];
    }
    r.p_greater = ge/all;
    r.p_two_sided = std::min(1.0, 2*std::min(ge, le)/all);
    return r;
}

paired_report paired_pipeline(std::span<const long long> ids, std::span<const double> pre,
                              std::span<const double> post, const paired_spec& spec, null_source& nulls) {
    if (ids.size() != pre.size() || pre.size() != post.size()) {
        fail(errc::invalid_argument, "id, pre and post columns differ in length");
    }
    paired_report rep;
    rep.alpha = spec.alpha;
    trial_spec trial = spec.trial;
    trial.alpha = spec.alpha;
    trial.log_transform = spec.log_transform;

    rep.pre_scan = scan_trials(pre, spec.max_candidates, spec.pre_sides, trial, nulls, ids);
    std::set<std::size_t> outliers;
    for (const auto& sel: {rep.pre_scan.selected_max, rep.pre_scan.selected_min}) {
        if (!sel) continue;
        for (const auto& c: rep.pre_scan.entries[*sel].report->candidates) outliers.insert(c.index);
    }
    if (outliers.empty()) fail(errc::no_pretest_outliers, "the pretest scan selected no outliers; nothing to pair");

    rep.post_scan = scan_trials(post, spec.max_candidates, spec.post_sides, trial, nulls, ids);
    rep.post_outliers_found = rep.post_scan.selected_max.has_value() || rep.post_scan.selected_min.has_value();
    if (rep.post_outliers_found) rep.notes.emplace_back("the posttest scan also selected outliers");

    auto scale = [&](double v) { return spec.log_transform ? std::log10(v) : v; };
    std::vector<double> in_pre, in_post;
    for (std::size_t i = 0; i < pre.size(); ++i) {
        if (!outliers.count(i)) {
            in_pre.push_back(scale(pre[i]));
            in_post.push_back(scale(post[i]));
        }
    }
    // The subject enters as a candidate against the same inliers in both
    // tests, so one null size serves both.
    const int size = static_cast<int>(in_pre.size()) + 1;
    const auto post_fit = fit(in_post, dist_kind::normal, trial.gof).fitted;
    const double crit_post = nulls.critical_value(post_fit, size, spec.alpha);

    std::vector<double> hp, hq;
    // Most extreme pretest value first.
    std::vector<std::size_t> order(outliers.begin(), outliers.end());
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pre[a] > pre[b]; });
    for (auto i: order) {
        paired_subject s;
        s.id = ids[i];
        s.h_pre = per_subject_h(in_pre, scale(pre[i]));
        s.h_post = per_subject_h(in_post, scale(post[i]));
        s.post_in_rejection_region = s.h_post > crit_post;
        if (s.post_in_rejection_region) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "id %lld: posttest h* %.4f still exceeds the critical value %.4f",
                          s.id, s.h_post, crit_post);
            rep.notes.emplace_back(buf);
        }
        hp.push_back(s.h_pre);
        hq.push_back(s.h_post);
        rep.subjects.push_back(s);
        rep.outlier_ids.push_back(s.id);
    }

    if (rep.subjects.size() == 1) {
        rep.notes.emplace_back("a single pretest outlier: no paired test is run");
        return rep;
    }
    try {
        rep.approx = wilcoxon_signed_rank(hp, hq, wilcoxon_mode::normal_approx_cc);
        rep.exact = wilcoxon_signed_rank(hp, hq, wilcoxon_mode::exact);
    }
    catch (const error& e) {
        if (e.code() != errc::too_few_pairs && e.code() != errc::all_zero_differences) throw;
        rep.approx.reset();
        rep.exact.reset();
        rep.notes.emplace_back(std::string("no paired test: ") + e.what());
        return rep;
    }
    const auto& chosen = spec.mode == wilcoxon_mode::exact ? *rep.exact : *rep.approx;
    rep.p_reported = spec.one_sided ? chosen.p_greater : chosen.p_two_sided;
    rep.significant = rep.p_reported < spec.alpha;
    return rep;
}

nlohmann::json to_json(const wilcoxon_result& w) {
    return {{"mode", to_string(w.mode)}, {"W", w.w}, {"n", w.n}, {"z", w.z}, {"p_two_sided", w.p_two_sided},
            {"p_greater", w.p_greater}};
}

nlohmann::json to_json(const paired_report& r) {
    nlohmann::json subjects = nlohmann::json::array();
    for (const auto& s: r.subjects) {
        subjects.push_back({{"id", s.id}, {"h_pre", s.h_pre}, {"h_post", s.h_post},
                            {"post_in_rejection_region", s.post_in_rejection_region}});
    }
    nlohmann::json j{{"schema", "hstar.paired_report/1"},
                     {"outlier_ids", r.outlier_ids},
                     {"post_outliers_found", r.post_outliers_found},
                     {"subjects", subjects},
                     {"alpha", r.alpha},
                     {"p_reported", r.p_reported},
                     {"significant", r.significant},
                     {"notes", r.notes},
                     {"pre_scan", to_json(r.pre_scan)},
                     {"post_scan", to_json(r.post_scan)}};
    j["wilcoxon"] = nlohmann::json::object();
    if (r.approx) j["wilcoxon"]["normal_approx_cc"] = to_json(*r.approx);
    if (r.exact) j["wilcoxon"]["exact"] = to_json(*r.exact);
    return j;
}

std::string render_paired(const paired_report& r, bool json) {
    if (json) return to_json(r).dump(2) + "\n";
    std::ostringstream os;
    os << "pretest outliers:";
    for (auto id: r.outlier_ids) os << ' ' << id;
    os << "\nposttest outliers: " << (r.post_outliers_found ? "found" : "none") << '\n';
    os << "      id     h*_pre    h*_post\n";
    for (const auto& s: r.subjects) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%8lld %10.4f %10.4f%s\n", s.id, s.h_pre, s.h_post,
                      s.post_in_rejection_region ? "  *" : "");
        os << buf;
    }
    auto line = [&](const wilcoxon_result& w) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "Wilcoxon signed-rank (%s): W = %g, n = %d, p two-sided = %.6f, p greater = %.6f\n",
                      to_string(w.mode), w.w, w.n, w.p_two_sided, w.p_greater);
        os << buf;
    };
    if (r.approx) line(*r.approx);
    if (r.exact) line(*r.exact);
    if (r.approx) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "verdict: %s at alpha %g (p = %.6f)\n",
                      r.significant ? "significant" : "not significant", r.alpha, r.p_reported);
        os << buf;
    }
    for (const auto& n: r.notes) os << "note: " << n << '\n';
    return os.str();
}

} // namespace hstar
