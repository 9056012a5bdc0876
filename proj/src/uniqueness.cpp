#include "hstar/uniqueness.hpp"

#include <sstream>

#include "hstar/error.hpp"

namespace hstar {

double i_index(long long f, long long n0) {
    if (f < 1 || n0 < 1 || f > n0) {
        fail(errc::invalid_counts, "need 1 <= f <= n0, got f = " + std::to_string(f) + ", n0 = " + std::to_string(n0));
    }
    return static_cast<double>(f)/static_cast<double>(n0);
}

void validate(const uniqueness_index& idx) {
    i_index(idx.f, idx.n0);
    long long prev = idx.n0;
    for (const auto& c: idx.cumulative) {
        if (c.n <= prev) fail(errc::invalid_counts, "cumulative sample sizes must increase strictly past n0");
        if (c.f < 0 || c.f > c.n) fail(errc::invalid_counts, "occurrences must lie in [0, N_i]");
        prev = c.n;
    }
    if (idx.population && prev > *idx.population) {
        fail(errc::invalid_counts, "cumulative sample exceeds the population size");
    }
}

const char* to_string(novelty v) noexcept {
    switch (v) {
    case novelty::holds: return "Holds";
    case novelty::equal: return "Equal";
    case novelty::violated: return "Violated";
    }
    return "?";
}

std::vector<novelty> novelty_holds(const uniqueness_index& idx) {
    validate(idx);
    std::vector<novelty> out;
    for (const auto& c: idx.cumulative) {
        // 1/n0 vs f/N  <=>  N vs f*n0.
        const __int128 lhs = c.n, rhs = static_cast<__int128>(c.f)*idx.n0;
        out.push_back(lhs > rhs ? novelty::holds : lhs == rhs ? novelty::equal : novelty::violated);
    }
    return out;
}

const char* to_string(quadrant q) noexcept {
    switch (q) {
    case quadrant::recurring_exceptional: return "recurring-exceptional";
    case quadrant::unique_genius: return "unique-genius";
    case quadrant::common_above_average: return "common-above-average";
    case quadrant::rare_ordinary: return "rare-ordinary";
    }
    return "?";
}

quadrant classify_quadrant(bool h_significant, double i_value, double i_threshold) {
    if (!(i_threshold > 0 && i_threshold <= 1)) fail(errc::invalid_argument, "the I threshold must lie in (0, 1]");
    const bool high = i_value >= i_threshold;
    if (h_significant) return high ? quadrant::recurring_exceptional : quadrant::unique_genius;
    return high ? quadrant::common_above_average : quadrant::rare_ordinary;
}

std::vector<checkpoint> parse_checkpoints(const std::string& text) {
    std::vector<checkpoint> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        try {
            if (colon == std::string::npos) throw std::invalid_argument(item);
            std::size_t a = 0, b = 0;
            const auto ns = item.substr(0, colon), fs = item.substr(colon + 1);
            checkpoint c{std::stoll(ns, &a), std::stoll(fs, &b)};
            if (a != ns.size() || b != fs.size()) throw std::invalid_argument(item);
            out.push_back(c);
        }
        catch (const std::exception&) {
            fail(errc::invalid_argument, "checkpoint '" + item + "' is not of the form n:f");
        }
    }
    if (out.empty()) fail(errc::invalid_argument, "no checkpoints given");
    // getline swallows a trailing empty item.
    if (text.back() == ',') fail(errc::invalid_argument, "checkpoint list ends with a comma");
    return out;
}

} // namespace hstar
