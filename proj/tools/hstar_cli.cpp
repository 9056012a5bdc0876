// hstar: command-line front end for the h* outlier test.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hstar/bayes.hpp"
#include "hstar/csv_input.hpp"
#include "hstar/error.hpp"
#include "hstar/iut.hpp"
#include "hstar/montecarlo.hpp"
#include "hstar/null_cache.hpp"
#include "hstar/paired.hpp"
#include "hstar/power.hpp"
#include "hstar/report.hpp"
#include "hstar/uniqueness.hpp"

namespace {

using namespace hstar;
using nlohmann::json;

enum exit_code { ok = 0, usage = 1, data_error = 2, procedure_error = 3 };

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct common {
    std::string seed_text;
    std::string trials_text = "1e6";
    std::string threads_text = "auto";
    std::string cache_dir;
    std::string out;
    std::string format = "text";
    bool interpolate = false;

    seed_t seed = 0;
    std::uint64_t trials = 0;
    unsigned threads = 0;
};

std::uint64_t parse_count(const std::string& s, const char* what) {
    double v = 0;
    try {
        std::size_t used = 0;
        v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
    }
    catch (const std::exception&) {
        throw usage_error(std::string(what) + ": '" + s + "' is not a number");
    }
    if (!(v >= 1) || v != std::floor(v) || v > 1e15) throw usage_error(std::string(what) + " must be a positive integer");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> parse_reals(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        }
        catch (const std::exception&) {
            throw usage_error(std::string(what) + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw usage_error(std::string(what) + " is empty");
    return out;
}

// "4..32,42..102:10,202"
std::vector<int> parse_sizes(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    auto to_int = [&](const std::string& t) {
        try {
            std::size_t used = 0;
            int v = std::stoi(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        }
        catch (const std::exception&) {
            throw usage_error("sizes: '" + t + "' is not an integer");
        }
    };
    while (std::getline(ss, item, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_int(item));
            continue;
        }
        const auto colon = item.find(':', dots);
        const int lo = to_int(item.substr(0, dots));
        const int hi = to_int(item.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
        const int step = colon == std::string::npos ? 1 : to_int(item.substr(colon + 1));
        if (step < 1 || hi < lo) throw usage_error("sizes: bad range '" + item + "'");
        for (int n = lo; n <= hi; n += step) out.push_back(n);
    }
    for (int n: out) {
        if (n < 4) throw usage_error("sizes must be at least 4");
    }
    if (out.empty()) throw usage_error("no sizes given");
    return out;
}

void add_common(CLI::App* app, common& c, bool with_trials = true) {
    app->add_option("--seed", c.seed_text, "Random seed (default: generated and printed)");
    if (with_trials) app->add_option("--trials", c.trials_text, "Monte Carlo trials per null distribution");
    app->add_option("--threads", c.threads_text, "Worker threads or 'auto'");
    app->add_option("--out", c.out, "Write results here instead of standard output");
}

void add_cache(CLI::App* app, common& c) {
    app->add_option("--cache-dir", c.cache_dir, "Directory for cached null distributions (default $HSTAR_CACHE_DIR)");
    app->add_flag("--interpolate", c.interpolate, "Interpolate p-values in 1/nu between cached sizes");
}

void resolve(common& c) {
    if (c.seed_text.empty()) c.seed = random_seed();
    else {
        try {
            std::size_t used = 0;
            c.seed = std::stoull(c.seed_text, &used);
            if (used != c.seed_text.size() || c.seed_text[0] == '-') throw std::invalid_argument(c.seed_text);
        }
        catch (const std::exception&) {
            throw usage_error("seed: '" + c.seed_text + "' is not a non-negative integer");
        }
    }
    c.trials = parse_count(c.trials_text, "trials");
    if (c.threads_text == "auto") c.threads = 0;
    else c.threads = static_cast<unsigned>(parse_count(c.threads_text, "threads"));
    if (c.format != "text" && c.format != "json") throw usage_error("format must be text or json");
    if (c.cache_dir.empty()) c.cache_dir = default_cache_directory();
}

cache_options cache_for(const common& c) {
    if (c.trials < 10000) throw usage_error("null distributions need at least 1e4 trials");
    cache_options o;
    o.trials = c.trials;
    o.seed = c.seed;
    o.sim.threads = c.threads;
    o.directory = c.cache_dir;
    o.policy = c.interpolate ? missing_row_policy::interpolate : missing_row_policy::simulate;
    return o;
}

void emit(const common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(c.out);
    if (!os) fail(errc::invalid_argument, "cannot write " + c.out);
    os << text;
}

side parse_side(const std::string& s) {
    if (s == "max") return side::max;
    if (s == "min") return side::min;
    throw usage_error("side must be max or min");
}

double check_alpha(double a) {
    if (!(a > 0 && a < 1)) throw usage_error("alpha must lie in (0, 1)");
    return a;
}

std::string seed_line(const common& c) {
    return "seed: " + std::to_string(c.seed) + "   trials: " + std::to_string(c.trials) + "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"h* outlier test: critical values, trials, power, Bayesian and paired analyses"};
    app.require_subcommand(1);
    int rc = ok;

    // test
    common tc;
    std::string t_path, t_column = "1", t_side = "max", t_prior = "normal", t_gof = "ad", t_select = "largest";
    int t_max = 3;
    double t_alpha = 0.05, t_floor = 0.01;
    bool t_log = false, t_strict = false;
    auto* test = app.add_subcommand("test", "Scan a data column for outliers on one or both sides");
    test->add_option("data", t_path, "CSV file with a header row")->required();
    test->add_option("--column", t_column, "Column name or 1-based position");
    test->add_option("--side", t_side, "max, min or both");
    test->add_option("--max-candidates", t_max, "Largest n' to try");
    test->add_option("--prior", t_prior, "normal or lognormal");
    test->add_option("--alpha", t_alpha, "Significance level");
    test->add_flag("--log", t_log, "Test log10 of the data");
    test->add_option("--gof", t_gof, "Goodness of fit: ad (Anderson-Darling), lilliefors, or ks (uncorrected Kolmogorov-Smirnov)");
    test->add_option("--fit-floor", t_floor, "Withhold the decision when the fit p is below this");
    test->add_flag("--strict-fit", t_strict, "Fail (exit 3) when the fit is rejected");
    test->add_option("--selection", t_select, "largest or smallest rejecting n'");
    test->add_option("--format", tc.format, "text or json");
    add_common(test, tc);
    add_cache(test, tc);

    // table
    common bc;
    std::string b_prior = "normal", b_sizes = "4..32,42..102:10,202..1002:100", b_alphas;
    double b_bin = default_bin_width;
    auto* table = app.add_subcommand("table", "Simulate a critical-value table");
    table->add_option("--prior", b_prior, "normal, lognormal or a spec such as lognormal(0,0.5)");
    table->add_option("--n", b_sizes, "Sizes: lists and ranges like 4..32,42..102:10");
    table->add_option("--alphas", b_alphas, "Comma-separated levels (default the ten standard levels)");
    table->add_option("--bin", b_bin, "Bin width");
    add_common(table, bc);

    // power
    common pc;
    std::string p_effects = "1.7,3.7,6.6", p_cls = "0.90,0.95,0.99", p_sizes = "4..32,42..102:10";
    std::string p_power_trials = "1e4";
    auto* power = app.add_subcommand("power", "Power curves for a shifted outlier");
    power->add_option("--effects", p_effects, "Effect sizes (mean shifts)");
    power->add_option("--cls", p_cls, "Confidence levels");
    power->add_option("--n", p_sizes, "Sample sizes");
    power->add_option("--power-trials", p_power_trials, "Trials per point");
    add_common(power, pc);
    add_cache(power, pc);

    // accumulate
    common ac;
    std::string a_effects = "1.7,3.7,6.6", a_acc_trials = "1e3", a_summary;
    int a_lo = 4, a_hi = 1000, a_points = 40, w_lo = 20, w_hi = 0;
    double a_alpha = 0.05;
    auto* accumulate = app.add_subcommand("accumulate", "Sample-size accumulation study");
    accumulate->add_option("--effects", a_effects, "Effect sizes");
    accumulate->add_option("--n-min", a_lo, "Smallest size");
    accumulate->add_option("--n-max", a_hi, "Largest size");
    accumulate->add_option("--points", a_points, "Log-spaced schedule points");
    accumulate->add_option("--study-trials", a_acc_trials, "Trials of the study");
    accumulate->add_option("--alpha", a_alpha, "Level for the power column");
    accumulate->add_option("--window-lo", w_lo, "Regression window start");
    accumulate->add_option("--window-hi", w_hi, "Regression window end (default n-max)");
    accumulate->add_option("--summary", a_summary, "Write power and regression summary here (default stdout)");
    add_common(accumulate, ac);
    add_cache(accumulate, ac);

    // bayes
    common yc;
    std::string y_path, y_column = "1", y_side = "max";
    int y_nprime = 1;
    double y_tau = 5;
    bool y_log = false, y_zero = false;
    auto* bayes = app.add_subcommand("bayes", "Posterior outlier probabilities for the extrema");
    bayes->add_option("data", y_path, "CSV file with a header row")->required();
    bayes->add_option("--column", y_column, "Column name or 1-based position");
    bayes->add_option("--side", y_side, "max or min");
    bayes->add_option("--n-prime", y_nprime, "Number of candidates");
    bayes->add_option("--tau", y_tau, "Scale of the half-normal effect prior");
    bayes->add_flag("--log", y_log, "Use log10 of the data");
    bayes->add_flag("--include-all-zero", y_zero, "Add the no-outlier outcome to the combined normaliser");
    bayes->add_option("--format", yc.format, "text or json");
    yc.trials_text = "1e5";
    add_common(bayes, yc);

    // paired
    common qc;
    std::string q_path, q_mode = "normal_approx_cc", q_gof = "ad";
    double q_floor = 0.01;
    int q_max = 7;
    double q_alpha = 0.05;
    bool q_log = false, q_one = false;
    auto* paired = app.add_subcommand("paired", "Pre/post treatment test on the pretest outliers' h*");
    paired->add_option("data", q_path, "CSV file with columns id,pre,post")->required();
    paired->add_flag("--log", q_log, "Use log10 scores");
    paired->add_option("--alpha", q_alpha, "Significance level");
    paired->add_option("--max-candidates", q_max, "Largest n' in the scans");
    paired->add_option("--mode", q_mode, "normal_approx_cc or exact (reported p)");
    paired->add_flag("--one-sided", q_one, "Report the one-sided p (pre > post)");
    paired->add_option("--gof", q_gof, "Goodness of fit for the scans: ad, lilliefors or ks");
    paired->add_option("--fit-floor", q_floor, "Withhold trial decisions when the fit p is below this");
    paired->add_option("--format", qc.format, "text or json");
    add_common(paired, qc);
    add_cache(paired, qc);

    // unique
    long long u_f = 0, u_n0 = 0, u_pop = 0;
    std::string u_samples, u_hsig;
    double u_thr = -1;
    std::string u_format = "text";
    auto* unique = app.add_subcommand("unique", "I-index and novelty checkpoints");
    unique->add_option("--f", u_f, "Occurrences in the initial sample")->required();
    unique->add_option("--n0", u_n0, "Initial sample size")->required();
    unique->add_option("--samples", u_samples, "Cumulative checkpoints n1:f1,n2:f2,...");
    unique->add_option("--population", u_pop, "Population size N, if known");
    unique->add_option("--h-significant", u_hsig, "yes/no: classify the quadrant (needs --i-threshold)");
    unique->add_option("--i-threshold", u_thr, "Threshold for a high I");
    unique->add_option("--format", u_format, "text or json");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int r = app.exit(e);
        return r == 0 ? ok : usage;
    }

    try {
        if (*test) {
            resolve(tc);
            trial_spec spec;
            spec.prior = parse_dist_kind(t_prior);
            spec.alpha = check_alpha(t_alpha);
            spec.log_transform = t_log;
            spec.gof = parse_gof_test(t_gof);
            spec.fit_floor = t_floor;
            spec.strict_fit = t_strict;
            if (t_max < 1) throw usage_error("max candidates must be at least 1");
            std::vector<side> sides;
            if (t_side == "both") sides = {side::max, side::min};
            else sides = {parse_side(t_side)};
            if (t_select != "largest" && t_select != "smallest") throw usage_error("selection must be largest or smallest");
            const auto data = read_column(t_path, t_column);
            null_cache nulls(cache_for(tc));
            auto scan = scan_trials(data, t_max, sides, spec, nulls, {},
                                    t_select == "largest" ? selection_rule::largest : selection_rule::smallest);
            if (tc.format == "json") {
                auto j = to_json(scan);
                j["seed"] = tc.seed;
                j["trials"] = tc.trials;
                emit(tc, j.dump(2) + "\n");
            }
            else emit(tc, seed_line(tc) + "\n" + render_scan(scan, report_format::text));
            for (const auto& e: scan.entries) {
                if (e.error_code && *e.error_code == errc::fit_rejected) rc = procedure_error;
            }
        }
        else if (*table) {
            resolve(bc);
            const auto prior = parse_distribution(b_prior);
            const auto sizes = parse_sizes(b_sizes);
            const auto levels = b_alphas.empty() ? standard_levels() : parse_reals(b_alphas, "alphas");
            for (double a: levels) check_alpha(a);
            simulation_options opts;
            opts.bin_width = b_bin;
            opts.threads = bc.threads;
            if (bc.trials < 10000) throw usage_error("tables need at least 1e4 trials");
            const auto t = build_table(prior, sizes, levels, bc.trials, bc.seed, opts);
            std::ostringstream os;
            write_table(os, t);
            emit(bc, os.str());
            if (!bc.out.empty()) std::cerr << "seed: " << bc.seed << '\n';
        }
        else if (*power) {
            resolve(pc);
            power_spec spec;
            spec.effects = parse_reals(p_effects, "effects");
            spec.confidence_levels = parse_reals(p_cls, "cls");
            for (double c: spec.confidence_levels) check_alpha(1 - c);
            spec.sizes = parse_sizes(p_sizes);
            spec.trials = parse_count(p_power_trials, "power trials");
            spec.seed = pc.seed;
            spec.threads = pc.threads;
            null_cache nulls(cache_for(pc));
            const auto pts = power_curve(spec, nulls);
            std::ostringstream os;
            os << "# seed=" << pc.seed << ", trials=" << spec.trials << ", null_trials=" << pc.trials << '\n';
            write_power_csv(os, pts);
            emit(pc, os.str());
        }
        else if (*accumulate) {
            resolve(ac);
            if (w_hi == 0) w_hi = a_hi;
            const auto effects = parse_reals(a_effects, "effects");
            const auto schedule = log_spaced_sizes(a_lo, a_hi, a_points);
            null_cache nulls(cache_for(ac));
            std::ostringstream csv, summary;
            csv << "# seed=" << ac.seed << ", trials=" << a_acc_trials << ", null_trials=" << ac.trials << '\n';
            summary << "seed: " << ac.seed << "   regression window: n in [" << w_lo << ", " << w_hi << "]\n";
            summary << "effect   slope(log10 n)  adjR2   slope(sqrt n)  adjR2   beta     adjR2\n";
            std::ostringstream pw;
            pw << "effect,n,power\n";
            bool first = true;
            for (double d: effects) {
                accumulation_spec spec;
                spec.effect = d;
                spec.schedule = schedule;
                spec.trials = parse_count(a_acc_trials, "study trials");
                spec.seed = ac.seed;
                spec.alpha = check_alpha(a_alpha);
                spec.threads = ac.threads;
                const auto pts = accumulation_study(spec, nulls);
                write_accumulation_csv(csv, d, pts, first);
                first = false;
                const window w{w_lo, w_hi};
                const auto rl = regress(pts, x_transform::log10_n, w);
                const auto rs = regress(pts, x_transform::sqrt_n, w);
                const auto pl = power_law(pts, w);
                char buf[160];
                std::snprintf(buf, sizeof buf, "%-8g %-15.4f %-7.4f %-14.4f %-7.4f %-8.4f %.4f\n", d, rl.slope,
                              rl.adjusted_r2, rs.slope, rs.adjusted_r2, pl.slope, pl.adjusted_r2);
                summary << buf;
                for (const auto& p: pts) {
                    std::snprintf(buf, sizeof buf, "%g,%d,%.4f\n", d, p.n, p.power);
                    pw << buf;
                }
            }
            emit(ac, csv.str());
            const std::string text = summary.str() + "\n" + pw.str();
            if (a_summary.empty()) std::cout << (ac.out.empty() ? "\n" : "") << text;
            else {
                std::ofstream os(a_summary);
                if (!os) fail(errc::invalid_argument, "cannot write " + a_summary);
                os << text;
            }
        }
        else if (*bayes) {
            resolve(yc);
            bayes_spec spec;
            spec.tau = y_tau;
            spec.trials = yc.trials;
            spec.seed = yc.seed;
            spec.threads = yc.threads;
            spec.include_all_zero = y_zero;
            const auto data = read_column(y_path, y_column);
            const auto r = bayes_analysis(data, y_nprime, parse_side(y_side), y_log, spec);
            json j{{"schema", "hstar.posterior/1"},
                   {"seed", yc.seed},
                   {"spec",
                    {{"tau", spec.tau},
                     {"delta_intervals", spec.delta_intervals},
                     {"delta_span", spec.delta_span},
                     {"pi_nodes", spec.pi_nodes},
                     {"trials", spec.trials},
                     {"epsilon", r.epsilon},
                     {"include_all_zero", spec.include_all_zero}}},
                   {"side", to_string(r.extreme)},
                   {"n", r.n},
                   {"n_prime", r.n_prime},
                   {"log_transform", r.log_transform},
                   {"combined", r.combined.combined},
                   {"normalizer", r.combined.k},
                   {"notices", r.notices}};
            j["candidates"] = json::array();
            for (const auto& c: r.candidates) {
                j["candidates"].push_back({{"index", c.index}, {"id", c.id}, {"h_star", c.h_star}, {"l1", c.l1},
                                           {"l0", c.l0}, {"posterior", c.posterior},
                                           {"posterior_eps_low", c.posterior_eps_low},
                                           {"posterior_eps_high", c.posterior_eps_high}});
            }
            if (yc.format == "json") emit(yc, j.dump(2) + "\n");
            else {
                std::ostringstream os;
                os << "seed: " << yc.seed << "   trials: " << spec.trials << "   tau: " << spec.tau << '\n';
                os << "side: " << to_string(r.extreme) << "   n: " << r.n << "   candidates: " << r.n_prime << '\n';
                os << "candidate        h*   P(L=1|h*)   (eps/10, eps*10)\n";
                for (const auto& c: r.candidates) {
                    char buf[128];
                    std::snprintf(buf, sizeof buf, "%9lld %9.4f %11.4f   (%.4f, %.4f)\n", c.id, c.h_star, c.posterior,
                                  c.posterior_eps_low, c.posterior_eps_high);
                    os << buf;
                }
                char buf[96];
                std::snprintf(buf, sizeof buf, "combined: %.6f   normaliser K: %.6g\n", r.combined.combined,
                              r.combined.k);
                os << buf;
                for (const auto& n: r.notices) os << "note: " << n << '\n';
                emit(yc, os.str());
            }
        }
        else if (*paired) {
            resolve(qc);
            const auto rows = read_paired(q_path);
            paired_spec spec;
            spec.log_transform = q_log;
            spec.alpha = check_alpha(q_alpha);
            spec.max_candidates = q_max;
            spec.mode = parse_wilcoxon_mode(q_mode);
            spec.one_sided = q_one;
            spec.trial.gof = parse_gof_test(q_gof);
            spec.trial.fit_floor = q_floor;
            null_cache nulls(cache_for(qc));
            const auto r = paired_pipeline(rows.ids, rows.pre, rows.post, spec, nulls);
            if (qc.format == "json") {
                auto j = to_json(r);
                j["seed"] = qc.seed;
                j["trials"] = qc.trials;
                emit(qc, j.dump(2) + "\n");
            }
            else emit(qc, seed_line(qc) + render_paired(r, false));
        }
        else if (*unique) {
            uniqueness_index idx;
            idx.f = u_f;
            idx.n0 = u_n0;
            if (!u_samples.empty()) idx.cumulative = parse_checkpoints(u_samples);
            if (u_pop > 0) idx.population = u_pop;
            const double i = i_index(idx.f, idx.n0);
            const auto verdicts = novelty_holds(idx);
            std::optional<quadrant> q;
            if (!u_hsig.empty()) {
                if (u_thr < 0) throw usage_error("--h-significant needs an explicit --i-threshold");
                if (u_hsig != "yes" && u_hsig != "no") throw usage_error("--h-significant takes yes or no");
                q = classify_quadrant(u_hsig == "yes", i, u_thr);
            }
            if (u_format == "json") {
                json j{{"schema", "hstar.uniqueness/1"}, {"f", idx.f}, {"n0", idx.n0}, {"I", i}};
                j["checkpoints"] = json::array();
                for (std::size_t k = 0; k < verdicts.size(); ++k) {
                    j["checkpoints"].push_back({{"n", idx.cumulative[k].n}, {"f", idx.cumulative[k].f},
                                                {"novelty", to_string(verdicts[k])}});
                }
                if (q) j["quadrant"] = to_string(*q);
                std::cout << j.dump(2) << '\n';
            }
            else {
                std::printf("I = %lld/%lld = %.6g\n", idx.f, idx.n0, i);
                for (std::size_t k = 0; k < verdicts.size(); ++k) {
                    std::printf("checkpoint %lld/%lld: %s\n", idx.cumulative[k].f, idx.cumulative[k].n,
                                to_string(verdicts[k]));
                }
                if (q) std::printf("quadrant: %s\n", to_string(*q));
            }
        }
    }
    catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    }
    catch (const hstar::error& e) {
        std::cerr << e.what() << '\n';
        return is_procedure_error(e.code()) ? procedure_error : data_error;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return data_error;
    }
    return rc;
}
