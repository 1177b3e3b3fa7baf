#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace schrolab::io {

/// Shortest round-trip decimal representation of a double ("inf", "-inf",
/// "nan" for non-finite values). Locale independent.
std::string format_double(double value);

/// Joins already formatted cells with commas and appends a newline.
std::string csv_row(const std::vector<std::string>& cells);
std::string csv_row(const std::vector<double>& values);

/// Writes `content` to `path` via a sibling temporary file and a rename, so
/// readers never observe a partially written file. Creates parent
/// directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Splits one CSV line on commas (no quoting support; none of our formats
/// need it).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace schrolab::io
