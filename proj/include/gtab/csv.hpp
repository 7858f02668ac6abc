#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gtab::csv {

/// A parsed delimited file. Line numbers are 1-based and refer to the source
/// file, for error messages.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

/// Splits one line on `delim`, honoring double-quoted fields ("" escapes a
/// quote). Surrounding whitespace is kept.
std::vector<std::string> split_line(std::string_view line, char delim);

/// Picks ',' or '\t' (or ' ' for whitespace-separated files) from a sample
/// line.
char detect_delimiter(std::string_view line);

/// Reads a delimited file. When `has_header` is false, `header` stays empty.
/// Blank lines are skipped; a trailing '\r' is stripped.
Table read(const std::filesystem::path& path, bool has_header);

/// Quotes a field if it contains the delimiter, a quote or a newline.
std::string quote(std::string_view field, char delim = ',');

/// Shortest round-trip decimal form of a double; missing values become "nan".
std::string format_double(double v);

/// Parses a numeric cell. Empty, "nan", "NaN", "NA" parse as missing.
/// Returns false on garbage.
bool parse_double(std::string_view cell, double& out);

std::string trim(std::string_view s);

}  // namespace gtab::csv
