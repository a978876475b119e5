#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>

#include "freelab/equilibrium.hpp"
#include "freelab/inequalities.hpp"
#include "freelab/rmt.hpp"

namespace freelab {

inline constexpr int kSchemaVersion = 1;

// Non-finite numbers become the strings "infinity", "neg_infinity" or "nan".
nlohmann::json number_field(double value);

nlohmann::json to_json(const InequalityReport& report, std::uint64_t seed);
nlohmann::json to_json(const EquilibriumResult& result, double tolerance, long long runtime_ms,
                       std::uint64_t seed);
nlohmann::json to_json(const ConvergenceSeries& series, std::uint64_t seed);

// Compact JSON with sorted keys and doubles printed with 17 significant digits, so that
// parsing and dumping again reproduces the text byte for byte.
std::string dump_json(const nlohmann::json& value);

// Columns N,statistic,target; an absent target is left empty.
std::string series_csv(const ConvergenceSeries& series);

// Header kind,inputs,lhs,rhs,deficit,pass and one row per report.
std::string summary_csv_header();
std::string summary_csv_row(const InequalityReport& report);

// Writes the whole file or throws IoError.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace freelab
