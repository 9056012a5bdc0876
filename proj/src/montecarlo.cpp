#include "hstar/montecarlo.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "hstar/core_stat.hpp"
#include "hstar/error.hpp"
#include "parallel.hpp"

namespace hstar {

namespace {

std::size_t bin_count(double width, double cap) {
    return static_cast<std::size_t>(std::ceil((cap - h_star_floor)/width - 1e-9));
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string prior_label(const distribution_spec& p) {
    if (p == distribution_spec::normal(0, 1)) return "normal";
    if (p == distribution_spec::lognormal(0, 1)) return "lognormal";
    return describe(p);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c: s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[noreturn]] void malformed(const std::string& msg) { fail(errc::malformed_table_file, msg); }

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

// Parses "# k=v, k=v" into a map; keys may contain no ',' or '='.
std::map<std::string, std::string> parse_header(const std::string& line) {
    if (line.empty() || line[0] != '#') malformed("expected '#' header line, got '" + line + "'");
    std::map<std::string, std::string> kv;
    std::string body = line.substr(1);
    // prior=truncated_normal(0,1,2) holds commas inside parentheses.
    int depth = 0;
    std::string cur;
    auto flush = [&] {
        auto t = trim(cur);
        cur.clear();
        if (t.empty()) return;
        auto eq = t.find('=');
        if (eq == std::string::npos) malformed("header field without '=': '" + t + "'");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    };
    for (char c: body) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) flush();
        else cur += c;
    }
    flush();
    return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) malformed("header is missing '" + key + "'");
    return it->second;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    }
    catch (const std::exception&) {
        malformed("bad number for " + what + ": '" + s + "'");
    }
}

std::uint64_t to_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        auto v = std::stoull(s, &used);
        if (used != s.size() || s.find('-') != std::string::npos) throw std::invalid_argument(s);
        return v;
    }
    catch (const std::exception&) {
        malformed("bad integer for " + what + ": '" + s + "'");
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

double default_cap(dist_kind kind) noexcept { return kind == dist_kind::lognormal ? 1e4 : 200.0; }

null_distribution::null_distribution(distribution_spec prior, int n, double bin_width, double cap, seed_t seed)
    : prior_(prior), n_(n), bin_width_(bin_width), cap_(cap), seed_(seed) {
    if (!(bin_width > 0) || !(cap > h_star_floor + bin_width)) {
        fail(errc::invalid_argument, "bin width must be positive and the cap above the first bin");
    }
    counts_.assign(bin_count(bin_width, cap), 0);
}

void null_distribution::add(double h) {
    ++total_;
    if (std::isinf(h)) {
        ++infinite_;
        return;
    }
    if (h >= cap_) {
        spill_.push_back(h);
        return;
    }
    // Rounding can put h a hair under 1/sqrt(2).
    double pos = (h - h_star_floor)/bin_width_;
    std::size_t i = pos <= 0 ? 0 : static_cast<std::size_t>(pos);
    counts_[std::min(i, counts_.size() - 1)]++;
}

bool null_distribution::same_layout(const null_distribution& o) const noexcept {
    return prior_ == o.prior_ && n_ == o.n_ && bin_width_ == o.bin_width_ && cap_ == o.cap_;
}

void null_distribution::merge(const null_distribution& o) {
    if (!same_layout(o)) fail(errc::invalid_argument, "merging null distributions with different layouts");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    spill_.insert(spill_.end(), o.spill_.begin(), o.spill_.end());
    infinite_ += o.infinite_;
    total_ += o.total_;
    finalise();
}

void null_distribution::finalise() { std::sort(spill_.begin(), spill_.end()); }

double null_distribution::cdf(double h) const {
    if (total_ == 0) return 0;
    if (h < h_star_floor) return 0;
    if (std::isinf(h)) return 1;
    std::uint64_t below = 0;
    if (h >= cap_) {
        for (auto c: counts_) below += c;
        below += static_cast<std::uint64_t>(std::upper_bound(spill_.begin(), spill_.end(), h) - spill_.begin());
    }
    else {
        // Mass of the bins whose right edge is <= h.
        auto k = static_cast<std::size_t>((h - h_star_floor)/bin_width_);
        for (std::size_t i = 0; i < k && i < counts_.size(); ++i) below += counts_[i];
    }
    return static_cast<double>(below)/static_cast<double>(total_);
}

std::vector<double> null_distribution::bin_masses() const {
    std::vector<double> m(counts_.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<double>(counts_[i])/static_cast<double>(total_);
    return m;
}

null_distribution null_distribution::restore(distribution_spec prior, int n, double bin_width, double cap,
                                             seed_t seed, std::vector<std::uint64_t> counts,
                                             std::vector<double> spill, std::uint64_t infinite) {
    null_distribution d(prior, n, bin_width, cap, seed);
    if (counts.size() != d.counts_.size()) fail(errc::malformed_table_file, "bin count does not match layout");
    d.counts_ = std::move(counts);
    d.spill_ = std::move(spill);
    d.infinite_ = infinite;
    d.total_ = infinite + d.spill_.size();
    for (auto c: d.counts_) d.total_ += c;
    d.finalise();
    return d;
}

null_distribution simulate_null_chunk(const distribution_spec& prior, int n, std::uint64_t first,
                                      std::uint64_t count, seed_t seed, const simulation_options& opts) {
    validate(prior);
    if (n < 4) fail(errc::too_few_observations, "null simulation needs n >= 4");
    const double cap = opts.cap > 0 ? opts.cap : default_cap(prior.kind);
    null_distribution out(prior, n, opts.bin_width, cap, seed);
    std::vector<double> buf(static_cast<std::size_t>(n));
    for (std::uint64_t t = first; t < first + count; ++t) {
        rng g = derive(seed, t);
        for (auto& x: buf) x = draw(prior, g);
        out.add(h_star_of_max(buf));
    }
    out.finalise();
    return out;
}

null_distribution simulate_null(const distribution_spec& prior, int n, std::uint64_t trials, seed_t seed,
                                const simulation_options& opts) {
    if (trials < 10000) fail(errc::invalid_argument, "null simulation needs at least 10^4 trials");
    validate(prior);
    if (prior.kind == dist_kind::truncated_normal) {
        // Surface truncation_infeasible once, before any thread starts.
        truncated_normal_quantile(0, (prior.lower - prior.mu)/prior.sigma, 0.5);
    }
    const unsigned slots = detail::resolve_threads(opts.threads, trials);
    std::vector<null_distribution> parts(slots);
    detail::for_slices(trials, slots, [&](unsigned k, std::uint64_t first, std::uint64_t count) {
        parts[k] = simulate_null_chunk(prior, n, first, count, seed, opts);
    });
    null_distribution out = std::move(parts[0]);
    for (unsigned k = 1; k < slots; ++k) out.merge(parts[k]);
    return out;
}

double critical_value(const null_distribution& null, double alpha) {
    if (!(alpha > 0 && alpha < 1)) fail(errc::invalid_argument, "alpha must lie in (0, 1)");
    const double total = static_cast<double>(null.total());
    if (total < 100/alpha) {
        fail(errc::insufficient_tail_mass, "alpha " + fmt("%g", alpha) + " needs at least "
             + fmt("%.0f", std::ceil(100/alpha)) + " trials, have " + fmt("%.0f", total));
    }
    // Number of values allowed strictly above the critical value.
    const auto allowed = static_cast<std::uint64_t>(std::floor(alpha*total));
    const auto& spill = null.spill();
    std::uint64_t tail = null.infinite() + spill.size();
    if (tail > allowed) {
        if (allowed < null.infinite()) return std::numeric_limits<double>::infinity();
        return spill[spill.size() - 1 - (allowed - null.infinite())];
    }
    const auto& counts = null.counts();
    for (std::size_t i = counts.size(); i-- > 0;) {
        if (tail + counts[i] > allowed) return null.bin_right(i);
        tail += counts[i];
    }
    return null.bin_origin();
}

double p_value(const null_distribution& null, double h_obs) {
    if (null.total() == 0) fail(errc::invalid_argument, "empty null distribution");
    if (std::isinf(h_obs) && h_obs > 0) return 0;
    const double total = static_cast<double>(null.total());
    if (h_obs <= null.bin_origin()) return 1;
    const auto& spill = null.spill();
    std::uint64_t at_or_above = null.infinite();
    if (h_obs >= null.cap()) {
        at_or_above += static_cast<std::uint64_t>(spill.end() - std::lower_bound(spill.begin(), spill.end(), h_obs));
    }
    else {
        at_or_above += spill.size();
        const auto& counts = null.counts();
        auto k = static_cast<std::size_t>((h_obs - null.bin_origin())/null.bin_width());
        for (std::size_t i = std::min(k, counts.size()); i < counts.size(); ++i) at_or_above += counts[i];
    }
    return std::clamp(static_cast<double>(at_or_above)/total, 1/total, 1.0);
}

seed_t null_seed(seed_t run_seed, const distribution_spec& prior, int n) {
    return stream_key(run_seed, stream_key(fnv1a(describe(standardized(prior))), static_cast<std::uint64_t>(n)));
}

void write_null(std::ostream& os, const null_distribution& null) {
    os << "# prior=" << describe(null.prior()) << ", sims=" << null.total() << ", seed=" << null.seed()
       << ", bin=" << fmt("%.17g", null.bin_width()) << '\n';
    os << "# n=" << null.n() << ", cap=" << fmt("%.17g", null.cap()) << '\n';
    os << "h_bin_left,count\n";
    const auto& counts = null.counts();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i]) os << fmt("%.10f", null.bin_left(i)) << ',' << counts[i] << '\n';
    }
    for (double v: null.spill()) os << fmt("%.17g", v) << ",1\n";
    if (null.infinite()) os << "inf," << null.infinite() << '\n';
}

null_distribution read_null(std::istream& is) {
    std::string l1, l2, l3;
    if (!std::getline(is, l1) || !std::getline(is, l2) || !std::getline(is, l3)) malformed("truncated null file header");
    auto h1 = parse_header(l1), h2 = parse_header(l2);
    distribution_spec prior;
    try {
        prior = parse_distribution(need(h1, "prior"));
    }
    catch (const error& e) {
        malformed(e.what());
    }
    const auto sims = to_u64(need(h1, "sims"), "sims");
    const auto seed = to_u64(need(h1, "seed"), "seed");
    const double bin = to_double(need(h1, "bin"), "bin");
    const int n = static_cast<int>(to_u64(need(h2, "n"), "n"));
    const double cap = to_double(need(h2, "cap"), "cap");
    if (trim(l3) != "h_bin_left,count") malformed("expected column header 'h_bin_left,count'");
    if (n < 4 || !(bin > 0) || !(cap > h_star_floor + bin)) malformed("invalid layout in null file header");

    std::vector<std::uint64_t> counts(bin_count(bin, cap), 0);
    std::vector<double> spill;
    std::uint64_t inf = 0;
    std::string line;
    std::size_t lineno = 3;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != 2) malformed("line " + std::to_string(lineno) + ": expected 2 fields");
        const auto c = to_u64(cells[1], "count");
        if (cells[0] == "inf") {
            inf += c;
            continue;
        }
        const double left = to_double(cells[0], "h_bin_left");
        if (left >= cap) {
            spill.insert(spill.end(), c, left);
            continue;
        }
        const double pos = (left - h_star_floor)/bin;
        const auto i = static_cast<long long>(std::llround(pos));
        if (i < 0 || static_cast<std::size_t>(i) >= counts.size() || std::abs(pos - i) > 1e-6) {
            malformed("line " + std::to_string(lineno) + ": " + cells[0] + " is not a bin edge");
        }
        counts[static_cast<std::size_t>(i)] += c;
    }
    auto d = null_distribution::restore(prior, n, bin, cap, seed, std::move(counts), std::move(spill), inf);
    if (d.total() != sims) malformed("counts sum to " + std::to_string(d.total()) + ", header says " + std::to_string(sims));
    return d;
}

const table_row* critical_value_table::row(int n) const {
    for (const auto& r: rows) {
        if (r.n == n) return &r;
    }
    return nullptr;
}

double critical_value_table::at(int n, double alpha) const {
    const auto* r = row(n);
    if (!r) fail(errc::invalid_argument, "table has no row for n = " + std::to_string(n));
    for (std::size_t j = 0; j < levels.size(); ++j) {
        if (std::abs(levels[j] - alpha) < 1e-12) return r->h_crit[j];
    }
    fail(errc::invalid_argument, "table has no column for alpha = " + fmt("%g", alpha));
}

critical_value_table build_table(const distribution_spec& prior, const std::vector<int>& ns,
                                 const std::vector<double>& levels, std::uint64_t trials, seed_t seed,
                                 const simulation_options& opts) {
    critical_value_table t;
    t.prior = prior_label(standardized(prior));
    t.sims = trials;
    t.seed = seed;
    t.bin_width = opts.bin_width;
    t.levels = levels;
    for (int n: ns) {
        auto null = simulate_null(standardized(prior), n, trials, null_seed(seed, prior, n), opts);
        table_row r{n, n - 2, {}};
        for (double a: levels) r.h_crit.push_back(std::round(critical_value(null, a)*1e4)/1e4);
        t.rows.push_back(std::move(r));
    }
    return t;
}

void write_table(std::ostream& os, const critical_value_table& t) {
    os << "# prior=" << t.prior << ", sims=" << t.sims << ", seed=";
    if (t.seed) os << *t.seed;
    else os << "na";
    os << ", bin=" << fmt("%g", t.bin_width) << '\n';
    os << "n,nu,alpha,h_crit\n";
    for (const auto& r: t.rows) {
        for (std::size_t j = 0; j < t.levels.size(); ++j) {
            os << r.n << ',' << r.nu << ',' << fmt("%g", t.levels[j]) << ',' << fmt("%.4f", r.h_crit[j]) << '\n';
        }
    }
}

critical_value_table read_table(std::istream& is) {
    std::string l1, l2;
    if (!std::getline(is, l1) || !std::getline(is, l2)) malformed("truncated table header");
    auto h = parse_header(l1);
    critical_value_table t;
    t.prior = need(h, "prior");
    t.sims = to_u64(need(h, "sims"), "sims");
    const auto& s = need(h, "seed");
    if (s == "na") t.seed.reset();
    else t.seed = to_u64(s, "seed");
    t.bin_width = to_double(need(h, "bin"), "bin");
    if (trim(l2) != "n,nu,alpha,h_crit") malformed("expected column header 'n,nu,alpha,h_crit'");

    t.levels.clear();
    std::string line;
    std::size_t lineno = 2;
    bool levels_fixed = false;
    std::size_t col = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::string where = "line " + std::to_string(lineno) + ": ";
        auto cells = split_csv(line);
        if (cells.size() != 4) malformed(where + "expected 4 fields");
        const int n = static_cast<int>(to_u64(cells[0], "n"));
        const int nu = static_cast<int>(to_u64(cells[1], "nu"));
        const double alpha = to_double(cells[2], "alpha");
        const double h = to_double(cells[3], "h_crit");
        if (nu != n - 2) malformed(where + "nu must equal n - 2");
        if (!(alpha > 0 && alpha < 1)) malformed(where + "alpha outside (0, 1)");
        if (!(h >= h_star_floor - 1e-4)) malformed(where + "critical value below 1/sqrt(2)");

        if (t.rows.empty() || t.rows.back().n != n) {
            if (!t.rows.empty()) {
                if (!levels_fixed) levels_fixed = true;
                if (col != t.levels.size()) malformed(where + "previous row is incomplete");
            }
            if (t.row(n)) malformed(where + "duplicate row for n = " + std::to_string(n));
            t.rows.push_back({n, nu, {}});
            col = 0;
        }
        auto& r = t.rows.back();
        if (!levels_fixed) t.levels.push_back(alpha);
        else if (col >= t.levels.size() || std::abs(t.levels[col] - alpha) > 1e-12) {
            malformed(where + "alpha columns differ from the first row");
        }
        if (col > 0) {
            if (!(alpha < t.levels[col - 1])) malformed(where + "alpha levels must decrease along a row");
            if (!(h > r.h_crit.back())) malformed(where + "critical values must increase as alpha decreases");
        }
        r.h_crit.push_back(h);
        ++col;
    }
    if (t.rows.empty()) malformed("table has no data rows");
    if (col != t.levels.size()) malformed("last row is incomplete");
    return t;
}

void save_table(const std::string& path, const critical_value_table& table) {
    std::ofstream os(path);
    if (!os) fail(errc::invalid_argument, "cannot write " + path);
    write_table(os, table);
}

critical_value_table load_table(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(errc::malformed_table_file, "cannot open " + path);
    return read_table(is);
}

} // namespace hstar
