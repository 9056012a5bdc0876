#pragma once

#include <istream>
#include <string>
#include <vector>

namespace hstar {

// Column by header name, or by 1-based position when the selector is a
// number. Every cell must be a finite number: anything else raises
// parse_error naming the row and column. No rows gives empty_column.
std::vector<double> read_column(std::istream& is, const std::string& selector);
std::vector<double> read_column(const std::string& path, const std::string& selector);

struct paired_rows {
    std::vector<long long> ids;
    std::vector<double> pre;
    std::vector<double> post;
};

// Layout `id,pre,post` (columns found by name, any order).
paired_rows read_paired(std::istream& is);
paired_rows read_paired(const std::string& path);

// One CSV record; double quotes group and "" escapes a quote.
std::vector<std::string> split_record(const std::string& line);

} // namespace hstar
