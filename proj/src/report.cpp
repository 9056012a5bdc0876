#include "hstar/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace hstar {

using nlohmann::json;

namespace {

json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double num_from(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.get<double>();
}

std::string f4(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

side parse_side(const std::string& s) {
    if (s == "max") return side::max;
    if (s == "min") return side::min;
    fail(errc::invalid_argument, "unknown side '" + s + "'");
}

json dist_json(const distribution_spec& d) {
    return {{"kind", to_string(d.kind)}, {"mu", num(d.mu)}, {"sigma", num(d.sigma)}, {"lower", num(d.lower)}};
}

void text_trial(std::ostream& os, const trial_report& r) {
    const auto& f = r.fit;
    os << "side: " << to_string(r.spec.extreme) << "   candidates: " << r.n_prime;
    if (r.n_prime != r.spec.n_prime) os << " (requested " << r.spec.n_prime << ")";
    os << "   n: " << r.n << "   null size: " << r.null_size << '\n';
    os << "scale: " << (r.spec.log_transform ? "log10" : "raw") << '\n';
    os << "prior: " << describe(f.fitted) << " fitted to " << r.n - r.n_prime << " ordinary values\n";
    os << "fit: " << to_string(f.test) << " statistic " << f4(f.gof_statistic) << ", p " << f4(f.gof_p_value);
    if (r.fit_rejected) os << " (below floor " << r.spec.fit_floor << ")";
    os << '\n';
    os << "candidate        value        h*         p\n";
    for (const auto& c: r.candidates) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%9lld %12.4f %9s %9s\n", c.id, c.value, f4(c.h_star).c_str(),
                      f4(c.p_value).c_str());
        os << buf;
    }
    os << "decision: " << to_string(r.verdict) << " at alpha " << r.spec.alpha << '\n';
    for (const auto& n: r.notices) os << "note: " << n << '\n';
}

} // namespace

report_format parse_report_format(const std::string& s) {
    if (s == "text") return report_format::text;
    if (s == "json") return report_format::json;
    fail(errc::invalid_argument, "unknown output format '" + s + "'");
}

json to_json(const trial_report& r) {
    json qq = json::array();
    for (const auto& [t, s]: r.fit.qq_points) qq.push_back({num(t), num(s)});
    json cands = json::array();
    for (const auto& c: r.candidates) {
        cands.push_back({{"index", c.index}, {"id", c.id}, {"value", num(c.value)}, {"h_star", num(c.h_star)},
                         {"p_value", num(c.p_value)}});
    }
    return {
        {"schema", trial_report_schema},
        {"spec",
         {{"side", to_string(r.spec.extreme)},
          {"n_prime", r.spec.n_prime},
          {"prior", to_string(r.spec.prior)},
          {"alpha", r.spec.alpha},
          {"log_transform", r.spec.log_transform},
          {"gof", to_string(r.spec.gof)},
          {"fit_floor", r.spec.fit_floor},
          {"strict_fit", r.spec.strict_fit}}},
        {"n", r.n},
        {"n_prime", r.n_prime},
        {"null_size", r.null_size},
        {"fit",
         {{"distribution", dist_json(r.fit.fitted)},
          {"test", to_string(r.fit.test)},
          {"statistic", num(r.fit.gof_statistic)},
          {"p_value", num(r.fit.gof_p_value)},
          {"qq", qq}}},
        {"fit_rejected", r.fit_rejected},
        {"candidates", cands},
        {"decision", to_string(r.verdict)},
        {"notices", r.notices},
    };
}

trial_report trial_report_from_json(const json& j) {
    try {
        if (j.at("schema") != trial_report_schema) {
            fail(errc::parse_error, "unsupported report schema " + j.at("schema").dump());
        }
        trial_report r;
        const auto& s = j.at("spec");
        r.spec.extreme = parse_side(s.at("side"));
        r.spec.n_prime = s.at("n_prime");
        r.spec.prior = parse_dist_kind(s.at("prior"));
        r.spec.alpha = s.at("alpha");
        r.spec.log_transform = s.at("log_transform");
        r.spec.gof = parse_gof_test(s.at("gof"));
        r.spec.fit_floor = s.at("fit_floor");
        r.spec.strict_fit = s.at("strict_fit");
        r.n = j.at("n");
        r.n_prime = j.at("n_prime");
        r.null_size = j.at("null_size");
        const auto& f = j.at("fit");
        const auto& d = f.at("distribution");
        r.fit.fitted = {parse_dist_kind(d.at("kind")), num_from(d.at("mu")), num_from(d.at("sigma")),
                        num_from(d.at("lower"))};
        r.fit.test = parse_gof_test(f.at("test"));
        r.fit.gof_statistic = num_from(f.at("statistic"));
        r.fit.gof_p_value = num_from(f.at("p_value"));
        for (const auto& p: f.at("qq")) r.fit.qq_points.emplace_back(num_from(p.at(0)), num_from(p.at(1)));
        r.fit_rejected = j.at("fit_rejected");
        for (const auto& c: j.at("candidates")) {
            r.candidates.push_back({c.at("index"), c.at("id"), num_from(c.at("value")), num_from(c.at("h_star")),
                                    num_from(c.at("p_value"))});
        }
        r.verdict = parse_decision(j.at("decision"));
        r.notices = j.at("notices").get<std::vector<std::string>>();
        return r;
    }
    catch (const json::exception& e) {
        fail(errc::parse_error, std::string("trial report JSON: ") + e.what());
    }
}

json to_json(const scan_result& s) {
    json entries = json::array();
    for (const auto& e: s.entries) {
        json x{{"side", to_string(e.extreme)}, {"requested", e.requested}};
        if (e.report) x["report"] = to_json(*e.report);
        else x["error"] = {{"code", to_string(*e.error_code)}, {"message", e.error}};
        entries.push_back(std::move(x));
    }
    auto sel = [&](const std::optional<std::size_t>& i) -> json {
        if (!i) return nullptr;
        json ids = json::array();
        for (const auto& c: s.entries[*i].report->candidates) ids.push_back(c.id);
        return {{"entry", *i}, {"n_prime", s.entries[*i].report->n_prime}, {"ids", ids}};
    };
    return {{"schema", scan_report_schema},
            {"selection_rule", s.rule == selection_rule::largest ? "largest" : "smallest"},
            {"selected", {{"max", sel(s.selected_max)}, {"min", sel(s.selected_min)}}},
            {"trials", entries}};
}

std::string render_report(const trial_report& r, report_format f) {
    if (f == report_format::json) return to_json(r).dump(2) + "\n";
    std::ostringstream os;
    text_trial(os, r);
    return os.str();
}

std::string render_scan(const scan_result& s, report_format f) {
    if (f == report_format::json) return to_json(s).dump(2) + "\n";
    std::ostringstream os;
    for (const auto& e: s.entries) {
        os << "== trial: " << to_string(e.extreme) << " side, " << e.requested << " candidate"
           << (e.requested == 1 ? "" : "s") << " ==\n";
        if (e.report) text_trial(os, *e.report);
        else os << "error: " << e.error << '\n';
        os << '\n';
    }
    for (auto [which, sel]: {std::pair{side::max, s.selected_max}, std::pair{side::min, s.selected_min}}) {
        const bool scanned = std::any_of(s.entries.begin(), s.entries.end(),
                                         [&](const scan_entry& e) { return e.extreme == which; });
        if (!scanned) continue;
        os << "selected (" << to_string(which) << "): ";
        if (!sel) {
            os << "none\n";
            continue;
        }
        const auto& r = *s.entries[*sel].report;
        for (std::size_t i = 0; i < r.candidates.size(); ++i) os << (i ? ", " : "") << r.candidates[i].id;
        os << '\n';
    }
    return os.str();
}

} // namespace hstar
