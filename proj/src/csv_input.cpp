#include "hstar/csv_input.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hstar/error.hpp"

namespace hstar {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

struct table {
    std::vector<std::string> header;
    // (line number, cells)
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

table read_table(std::istream& is) {
    table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split_record(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            fail(errc::parse_error, "row " + std::to_string(lineno) + ": " + std::to_string(cells.size())
                 + " fields, header has " + std::to_string(t.header.size()));
        }
        t.rows.emplace_back(lineno, std::move(cells));
    }
    if (t.header.empty()) fail(errc::empty_column, "the file has no header row");
    return t;
}

std::size_t find_column(const table& t, const std::string& selector) {
    const bool numeric = !selector.empty() && std::all_of(selector.begin(), selector.end(), ::isdigit);
    if (numeric) {
        const auto k = std::stoul(selector);
        if (k < 1 || k > t.header.size()) {
            fail(errc::invalid_argument, "column " + selector + " is out of range (1.." + std::to_string(t.header.size()) + ")");
        }
        return k - 1;
    }
    const auto it = std::find(t.header.begin(), t.header.end(), selector);
    if (it == t.header.end()) fail(errc::invalid_argument, "no column named '" + selector + "'");
    return static_cast<std::size_t>(it - t.header.begin());
}

double to_number(const std::string& cell, std::size_t lineno, const std::string& column) {
    const std::string where = "row " + std::to_string(lineno) + ", column '" + column + "'";
    if (cell.empty()) fail(errc::parse_error, where + ": missing value");
    double v = 0;
    try {
        std::size_t used = 0;
        v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
    }
    catch (const std::exception&) {
        fail(errc::parse_error, where + ": '" + cell + "' is not a number");
    }
    if (!std::isfinite(v)) fail(errc::parse_error, where + ": '" + cell + "' is not a finite number");
    return v;
}

std::ifstream open(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(errc::parse_error, "cannot open " + path);
    return is;
}

} // namespace

std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            }
            else if (c == '"') quoted = false;
            else cur += c;
        }
        else if (c == '"') quoted = true;
        else if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        }
        else cur += c;
    }
    out.push_back(trim(cur));
    return out;
}

std::vector<double> read_column(std::istream& is, const std::string& selector) {
    const auto t = read_table(is);
    const auto col = find_column(t, selector);
    std::vector<double> out;
    for (const auto& [lineno, cells]: t.rows) out.push_back(to_number(cells[col], lineno, t.header[col]));
    if (out.empty()) fail(errc::empty_column, "column '" + t.header[col] + "' has no values");
    return out;
}

std::vector<double> read_column(const std::string& path, const std::string& selector) {
    auto is = open(path);
    return read_column(is, selector);
}

paired_rows read_paired(std::istream& is) {
    const auto t = read_table(is);
    const auto ci = find_column(t, "id"), cp = find_column(t, "pre"), cq = find_column(t, "post");
    paired_rows out;
    for (const auto& [lineno, cells]: t.rows) {
        const double id = to_number(cells[ci], lineno, "id");
        if (id != std::floor(id)) fail(errc::parse_error, "row " + std::to_string(lineno) + ", column 'id': not an integer");
        out.ids.push_back(static_cast<long long>(id));
        out.pre.push_back(to_number(cells[cp], lineno, "pre"));
        out.post.push_back(to_number(cells[cq], lineno, "post"));
    }
    if (out.ids.empty()) fail(errc::empty_column, "no paired rows");
    return out;
}

paired_rows read_paired(const std::string& path) {
    auto is = open(path);
    return read_paired(is);
}

} // namespace hstar
