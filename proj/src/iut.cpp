#include "hstar/iut.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace hstar {

void validate(const trial_spec& spec) {
    if (spec.n_prime < 1) fail(errc::invalid_argument, "the number of candidates must be at least 1");
    if (!(spec.alpha > 0 && spec.alpha < 1)) fail(errc::invalid_argument, "alpha must lie in (0, 1)");
    if (!(spec.fit_floor >= 0 && spec.fit_floor < 1)) fail(errc::invalid_argument, "fit floor must lie in [0, 1)");
    if (spec.prior == dist_kind::truncated_normal) {
        fail(errc::invalid_argument, "trials support normal and lognormal priors");
    }
    if (spec.prior == dist_kind::lognormal && spec.extreme == side::min) {
        // The lognormal null describes the upper tail only.
        fail(errc::invalid_argument, "the minimum side needs a normal prior (use the log transform instead)");
    }
}

const char* to_string(decision d) noexcept {
    switch (d) {
    case decision::reject: return "Reject";
    case decision::do_not_reject: return "Do not reject";
    case decision::withheld: return "Withheld";
    }
    return "?";
}

decision parse_decision(const std::string& s) {
    if (s == "Reject") return decision::reject;
    if (s == "Do not reject") return decision::do_not_reject;
    if (s == "Withheld") return decision::withheld;
    fail(errc::invalid_argument, "unknown decision '" + s + "'");
}

std::vector<double> candidate_split::ordinary_oriented() const {
    std::vector<double> out;
    for (std::size_t i = static_cast<std::size_t>(k); i < order.size(); ++i) out.push_back(oriented[order[i]]);
    return out;
}

candidate_split split_candidates(std::span<const double> data, int n_prime, side extreme, bool log_transform) {
    if (n_prime < 1) fail(errc::invalid_argument, "the number of candidates must be at least 1");
    const int n = static_cast<int>(data.size());
    if (n < 4) fail(errc::too_few_observations, "at least 4 values are needed");
    candidate_split s;
    s.scale.assign(data.begin(), data.end());
    for (std::size_t i = 0; i < s.scale.size(); ++i) {
        if (!std::isfinite(s.scale[i])) fail(errc::non_finite_value, "value " + std::to_string(i + 1) + " is not finite");
        if (log_transform) {
            if (!(s.scale[i] > 0)) {
                fail(errc::nonpositive_value_for_lognormal,
                     "value " + std::to_string(i + 1) + " is not positive; cannot take logs");
            }
            s.scale[i] = std::log10(s.scale[i]);
        }
    }
    s.oriented = s.scale;
    if (extreme == side::min) {
        for (auto& v: s.oriented) v = -v;
    }
    s.order.resize(s.oriented.size());
    std::iota(s.order.begin(), s.order.end(), 0);
    std::stable_sort(s.order.begin(), s.order.end(), [&](auto a, auto b) { return s.oriented[a] > s.oriented[b]; });

    int k = std::min(n_prime, n);
    // Values tied with the last candidate cannot be told apart from it.
    while (k < n && s.oriented[s.order[k]] == s.oriented[s.order[k - 1]]) ++k;
    if (k != n_prime) {
        s.notices.push_back("n' raised from " + std::to_string(n_prime) + " to " + std::to_string(k)
                            + ": values tied with the last candidate join the candidate set");
    }
    if (n - k < 4) {
        fail(errc::too_few_ordinary, std::to_string(n - k) + " ordinary values remain after removing "
             + std::to_string(k) + " candidates; at least 4 are needed");
    }
    s.k = k;
    return s;
}

trial_report run_trial(std::span<const double> data, const trial_spec& spec, null_source& nulls,
                       std::span<const long long> ids) {
    validate(spec);
    if (!ids.empty() && ids.size() != data.size()) fail(errc::invalid_argument, "ids and data differ in length");
    const int n = static_cast<int>(data.size());
    if (n < 4) fail(errc::too_few_observations, "a trial needs at least 4 values");

    auto split = split_candidates(data, spec.n_prime, spec.extreme, spec.log_transform);
    const int k = split.k;
    trial_report rep;
    rep.spec = spec;
    rep.n = n;
    rep.n_prime = k;
    rep.notices = split.notices;
    rep.null_size = n - k + 1;

    std::vector<double> ordinary_scale;
    for (int i = k; i < n; ++i) ordinary_scale.push_back(split.scale[split.order[i]]);
    const auto ordinary = split.ordinary_oriented();
    rep.fit = fit(ordinary_scale, spec.prior, spec.gof);
    if (rep.fit.gof_p_value < spec.fit_floor) {
        rep.fit_rejected = true;
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "%s p = %.4f is below the floor %.4g; re-examine the prior distribution or the data",
                      to_string(spec.gof), rep.fit.gof_p_value, spec.fit_floor);
        if (spec.strict_fit) fail(errc::fit_rejected, buf);
        rep.notices.emplace_back(buf);
    }

    bool all_reject = true;
    for (int i = 0; i < k; ++i) {
        const auto idx = split.order[i];
        candidate_result c;
        c.index = idx;
        c.id = ids.empty() ? static_cast<long long>(idx) + 1 : ids[idx];
        c.value = split.scale[idx];
        c.h_star = h_star_with_candidate(ordinary, split.oriented[idx]);
        c.p_value = nulls.p_value(rep.fit.fitted, rep.null_size, c.h_star);
        all_reject = all_reject && c.p_value < spec.alpha;
        rep.candidates.push_back(c);
    }
    rep.verdict = rep.fit_rejected ? decision::withheld : all_reject ? decision::reject : decision::do_not_reject;
    return rep;
}

scan_result scan_trials(std::span<const double> data, int max_candidates, const std::vector<side>& sides,
                        const trial_spec& defaults, null_source& nulls, std::span<const long long> ids,
                        selection_rule rule) {
    if (max_candidates < 1) fail(errc::invalid_argument, "max candidates must be at least 1");
    scan_result out;
    out.rule = rule;
    for (side s: sides) {
        std::optional<std::size_t> chosen;
        int chosen_k = 0;
        for (int k = 1; k <= max_candidates; ++k) {
            scan_entry e;
            e.extreme = s;
            e.requested = k;
            trial_spec spec = defaults;
            spec.extreme = s;
            spec.n_prime = k;
            try {
                e.report = run_trial(data, spec, nulls, ids);
            }
            catch (const error& err) {
                e.error_code = err.code();
                e.error = err.what();
            }
            out.entries.push_back(std::move(e));
            const auto& r = out.entries.back().report;
            if (r && r->verdict == decision::reject) {
                const bool better = !chosen || (rule == selection_rule::largest ? r->n_prime > chosen_k
                                                                                 : r->n_prime < chosen_k);
                if (better) {
                    chosen = out.entries.size() - 1;
                    chosen_k = r->n_prime;
                }
            }
        }
        (s == side::max ? out.selected_max : out.selected_min) = chosen;
    }
    return out;
}

} // namespace hstar
