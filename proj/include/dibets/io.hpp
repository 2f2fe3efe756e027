#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dibets::io {

std::string read_file(const std::filesystem::path& path);
// Writes atomically (temp file + rename) and creates parent directories.
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view data);

// Splits on '\n', dropping a trailing '\r' and blank lines; pairs carry the
// 1-based line number.
std::vector<std::pair<std::size_t, std::string_view>> lines(std::string_view text);

// Shortest round-trip decimal for a double; "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double v);

std::string csv_escape(std::string_view field);

}  // namespace dibets::io
