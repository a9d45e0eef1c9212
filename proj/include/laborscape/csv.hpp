#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace laborscape {

/// One parsed record; `line` is the 1-based physical line where the record starts.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// RFC 4180 reader: comma separated, double-quoted fields may contain commas,
/// quotes ("") and newlines. Accepts LF or CRLF and strips a leading UTF-8 BOM.
/// Blank lines are skipped.
std::vector<CsvRow> parse_csv(std::string_view text);
std::vector<CsvRow> read_csv_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes to `<path>.tmp` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string csv_escape(std::string_view field);
std::string csv_line(const std::vector<std::string>& fields);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

double parse_double(std::string_view text, std::size_t line, std::string_view column);
std::int64_t parse_integer(std::string_view text, std::size_t line, std::string_view column);

std::string trim(std::string_view text);

std::string sha256_hex(std::string_view data);

}  // namespace laborscape
