#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace concept_dist::csv {

struct Row {
    std::size_t line = 0; // 1-based line where the record starts
    std::vector<std::string> fields;
};

/// Parses comma-separated text with RFC 4180 quoting (doubled quotes inside
/// quoted fields, embedded newlines allowed). Blank lines are skipped and a
/// leading UTF-8 BOM is ignored.
std::vector<Row> parse(std::string_view text);

/// Reads and parses a whole file. Throws DataError if it cannot be opened.
std::vector<Row> read_file(const std::filesystem::path& path);

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

/// Always quotes.
std::string quote(std::string_view field);

/// 17 significant digits; parses back to exactly the same double.
std::string format_exact(double value);

/// Fixed-point formatting with the given number of decimals.
std::string format_fixed(double value, int decimals);

/// Strict double parse of the whole field (surrounding blanks allowed).
/// Returns false on trailing garbage or empty input.
bool parse_double(std::string_view text, double& out);

bool parse_int(std::string_view text, long long& out);

} // namespace concept_dist::csv
