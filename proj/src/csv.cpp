#include "mortscen/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "mortscen/errors.hpp"

namespace mortscen::csv {

namespace {

std::string trim(const std::string &text) {
    std::size_t first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return "";
    std::size_t last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

} // namespace

std::vector<std::string> split_fields(const std::string &line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

std::vector<Row> read_table(const std::filesystem::path &path, const std::string &header) {
    std::ifstream in(path);
    if (!in)
        throw SchemaError("cannot open file: " + path.string());

    const std::vector<std::string> expected = split_fields(header);
    std::vector<Row> rows;
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        std::vector<std::string> fields = split_fields(line);
        if (!saw_header) {
            if (fields != expected)
                throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected header '" + header + "', got '" + trim(line) + "'");
            saw_header = true;
            continue;
        }
        if (fields.size() != expected.size())
            throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(expected.size()) + " fields, got " +
                              std::to_string(fields.size()));
        rows.push_back(Row{std::move(fields), line_no});
    }
    if (!saw_header)
        throw SchemaError(path.string() + ": file is empty, expected header '" + header + "'");
    return rows;
}

double parse_double(const std::string &field, const std::string &context) {
    if (field.empty())
        throw SchemaError(context + ": empty numeric field");
    errno = 0;
    char *end = nullptr;
    double value = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || errno == ERANGE || !std::isfinite(value))
        throw SchemaError(context + ": invalid number '" + field + "'");
    return value;
}

std::int64_t parse_int(const std::string &field, const std::string &context) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw SchemaError(context + ": invalid integer '" + field + "'");
    return value;
}

int parse_year(const std::string &field, const std::string &context) {
    std::int64_t value = parse_int(field, context);
    if (value < 1800 || value > 3000)
        throw SchemaError(context + ": implausible year '" + field + "'");
    return static_cast<int>(value);
}

std::string format_exact(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc())
        return "nan";
    return std::string(buffer, ptr);
}

std::string format_six(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6g", value);
    return buffer;
}

} // namespace mortscen::csv
