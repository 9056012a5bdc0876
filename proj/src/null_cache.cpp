#include "hstar/null_cache.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>

#include "hstar/error.hpp"

namespace fs = std::filesystem;

namespace hstar {

namespace {

std::string file_stem(const std::string& desc) {
    std::string out;
    for (char c: desc) {
        if (c == '(' || c == ',') out += '_';
        else if (c != ')') out += c;
    }
    return out;
}

} // namespace

double null_source::p_value(const distribution_spec& prior, int n, double h_obs) {
    return hstar::p_value(*get(prior, n), h_obs);
}

double null_source::critical_value(const distribution_spec& prior, int n, double alpha) {
    return hstar::critical_value(*get(prior, n), alpha);
}

std::string default_cache_directory() {
    const char* d = std::getenv("HSTAR_CACHE_DIR");
    return d ? d : "";
}

null_cache::null_cache(cache_options opts) : opts_(std::move(opts)) {
    if (opts_.trials < 10000) fail(errc::invalid_argument, "the null cache needs at least 10^4 trials per size");
}

std::size_t null_cache::simulated() const {
    std::lock_guard lock(mu_);
    return simulated_;
}

std::string null_cache::file_for(const distribution_spec& prior, int n) const {
    if (opts_.directory.empty()) return {};
    char bin[32];
    std::snprintf(bin, sizeof bin, "%g", opts_.sim.bin_width);
    auto name = "null_" + file_stem(describe(standardized(prior))) + "_n" + std::to_string(n) + "_bin" + bin + ".csv";
    return (fs::path(opts_.directory)/name).string();
}

std::shared_ptr<const null_distribution> null_cache::lookup(const key& k, const distribution_spec& std_prior,
                                                            int n) {
    {
        std::lock_guard lock(mu_);
        if (auto it = mem_.find(k); it != mem_.end()) return it->second;
    }
    auto path = file_for(std_prior, n);
    if (path.empty() || !fs::exists(path)) return nullptr;
    std::ifstream is(path);
    auto d = std::make_shared<null_distribution>(read_null(is));
    if (d->prior() != std_prior || d->n() != n || d->bin_width() != opts_.sim.bin_width) {
        fail(errc::malformed_table_file, path + " does not hold the null it is named for");
    }
    // Too small for the requested precision: treat as absent.
    if (d->total() < opts_.trials) return nullptr;
    std::lock_guard lock(mu_);
    return mem_.emplace(k, std::move(d)).first->second;
}

std::shared_ptr<const null_distribution> null_cache::find(const distribution_spec& prior, int n) {
    const auto sp = standardized(prior);
    return lookup({describe(sp), n}, sp, n);
}

std::shared_ptr<const null_distribution> null_cache::get(const distribution_spec& prior, int n) {
    const auto sp = standardized(prior);
    const key k{describe(sp), n};
    if (auto d = lookup(k, sp, n)) return d;

    std::shared_ptr<std::mutex> gate;
    {
        std::lock_guard lock(mu_);
        auto& g = building_[k];
        if (!g) g = std::make_shared<std::mutex>();
        gate = g;
    }
    std::lock_guard build(*gate);
    if (auto d = lookup(k, sp, n)) return d;

    auto d = std::make_shared<null_distribution>(
        simulate_null(sp, n, opts_.trials, null_seed(opts_.seed, sp, n), opts_.sim));
    if (auto path = file_for(sp, n); !path.empty()) {
        fs::create_directories(opts_.directory);
        const auto tmp = path + ".tmp" + std::to_string(opts_.seed);
        {
            std::ofstream os(tmp);
            write_null(os, *d);
        }
        fs::rename(tmp, path);
    }
    std::lock_guard lock(mu_);
    ++simulated_;
    return mem_.emplace(k, std::move(d)).first->second;
}

std::optional<double> null_cache::interpolated_p(const distribution_spec& std_prior, int n, double h_obs) {
    const auto desc = describe(std_prior);
    std::optional<int> lo, hi;
    auto consider = [&](int m) {
        if (m < n && (!lo || m > *lo)) lo = m;
        if (m > n && (!hi || m < *hi)) hi = m;
    };
    {
        std::lock_guard lock(mu_);
        for (const auto& [k, d]: mem_) {
            if (k.first == desc) consider(k.second);
        }
    }
    if (!opts_.directory.empty() && fs::is_directory(opts_.directory)) {
        char bin[32];
        std::snprintf(bin, sizeof bin, "%g", opts_.sim.bin_width);
        const std::regex re("null_" + std::regex_replace(file_stem(desc), std::regex(R"([.^$|()\[\]{}*+?\\])"), R"(\$&)")
                            + "_n([0-9]+)_bin" + std::regex_replace(std::string(bin), std::regex(R"(\.)"), R"(\.)")
                            + R"(\.csv)");
        for (const auto& e: fs::directory_iterator(opts_.directory)) {
            std::smatch m;
            const auto name = e.path().filename().string();
            if (std::regex_match(name, m, re)) consider(std::stoi(m[1].str()));
        }
    }
    if (!lo || !hi) return std::nullopt;
    auto dlo = lookup({desc, *lo}, std_prior, *lo);
    auto dhi = lookup({desc, *hi}, std_prior, *hi);
    if (!dlo || !dhi) return std::nullopt;
    const double plo = hstar::p_value(*dlo, h_obs), phi = hstar::p_value(*dhi, h_obs);
    const double x = 1.0/(n - 2), xlo = 1.0/(*lo - 2), xhi = 1.0/(*hi - 2);
    return plo + (phi - plo)*(x - xlo)/(xhi - xlo);
}

double null_cache::p_value(const distribution_spec& prior, int n, double h_obs) {
    if (opts_.policy == missing_row_policy::interpolate) {
        const auto sp = standardized(prior);
        if (!lookup({describe(sp), n}, sp, n)) {
            if (auto p = interpolated_p(sp, n, h_obs)) return *p;
        }
    }
    return null_source::p_value(prior, n, h_obs);
}

} // namespace hstar
