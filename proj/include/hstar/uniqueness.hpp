#pragma once

#include <optional>
#include <string>
#include <vector>

namespace hstar {

// I = f / n0. Throws invalid_counts unless 1 <= f <= n0.
double i_index(long long f, long long n0);

struct checkpoint {
    // Cumulative sample size and cumulative occurrence count.
    long long n = 0;
    long long f = 0;
};

struct uniqueness_index {
    long long f = 1;
    long long n0 = 1;
    std::vector<checkpoint> cumulative;
    // Size of the whole population, when known.
    std::optional<long long> population;
};

void validate(const uniqueness_index& idx);

enum class novelty { holds, equal, violated };

const char* to_string(novelty v) noexcept;

// Per checkpoint: 1/n0 against f_i/N_i, compared exactly.
std::vector<novelty> novelty_holds(const uniqueness_index& idx);

enum class quadrant { recurring_exceptional, unique_genius, common_above_average, rare_ordinary };

const char* to_string(quadrant q) noexcept;

// High I means i_value >= i_threshold; i_threshold must lie in (0, 1].
quadrant classify_quadrant(bool h_significant, double i_value, double i_threshold);

// Parses "n1:f1,n2:f2,...".
std::vector<checkpoint> parse_checkpoints(const std::string& text);

} // namespace hstar
