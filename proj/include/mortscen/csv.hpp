#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace mortscen::csv {

/// One parsed row with its 1-based line number (for diagnostics).
struct Row {
    std::vector<std::string> fields;
    int line = 0;
};

/// Read a comma-separated file: the first non-empty line must equal
/// `header`, every following non-empty line must have the same field count.
/// Fields are plain (no quoting or escaping). Throws SchemaError on layout
/// problems and on an unreadable file.
std::vector<Row> read_table(const std::filesystem::path &path, const std::string &header);

/// Split one line on commas, trimming surrounding whitespace per field.
std::vector<std::string> split_fields(const std::string &line);

/// Strict numeric field parsers; `context` feeds the error message.
double parse_double(const std::string &field, const std::string &context);
std::int64_t parse_int(const std::string &field, const std::string &context);
int parse_year(const std::string &field, const std::string &context);

/// Shortest decimal string that round-trips exactly to the same double.
std::string format_exact(double value);

/// Fixed six-significant-digit formatting for report tables.
std::string format_six(double value);

} // namespace mortscen::csv
