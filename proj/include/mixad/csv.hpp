#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mixad::csv {

// 17 significant digits: lossless f64 round trip.
std::string format(double v);

std::vector<std::string> split(const std::string& line, char delim);

// Parsers with file/line context in error messages.
double parse_double(const std::string& field, const std::string& context);
std::size_t parse_index(const std::string& field, const std::string& context);

std::vector<std::string> read_lines(const std::filesystem::path& path);

// Write-temp-then-rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace mixad::csv
