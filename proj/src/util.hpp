#pragma once

// Internal helpers shared by the library sources. Not installed.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace timelyhls {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Lines without terminators; a trailing '\r' is dropped. A final newline does
// not produce an extra empty line.
std::vector<std::string> split_lines(std::string_view text);

// Lines including their '\n' terminator (the last one may lack it).
std::vector<std::string_view> split_lines_keep(std::string_view text);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

std::optional<long long> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

// Shortest decimal text that round-trips the double.
std::string format_double(double v);
// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

// Round half away from zero to `digits` decimals.
double round_to(double v, int digits);

// Integer hundredths of `v` (round half away from zero).
std::int64_t to_centi(double v);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace timelyhls
