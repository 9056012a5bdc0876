#pragma once

#include <string>

#include <json.hpp>

#include "hstar/iut.hpp"

namespace hstar {

inline constexpr const char* trial_report_schema = "hstar.trial_report/1";
inline constexpr const char* scan_report_schema = "hstar.scan_report/1";

enum class report_format { text, json };

report_format parse_report_format(const std::string& s);

// JSON keys (schema hstar.trial_report/1):
//   schema, spec{side, n_prime, prior, alpha, log_transform, gof, fit_floor,
//   strict_fit}, n, n_prime, null_size, fit{distribution{kind, mu, sigma,
//   lower}, test, statistic, p_value, qq}, fit_rejected, candidates[{index,
//   id, value, h_star, p_value}], decision, notices.
// Non-finite numbers are written as the strings "inf" / "-inf".
nlohmann::json to_json(const trial_report& r);
trial_report trial_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const scan_result& s);

std::string render_report(const trial_report& r, report_format f);
std::string render_scan(const scan_result& s, report_format f);

} // namespace hstar
