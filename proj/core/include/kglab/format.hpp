#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kglab {

inline constexpr std::string_view kVersion = "0.1.0";

// Shortest decimal text that round-trips to the same double.  Output is
// locale independent, so CSV artifacts are byte-stable.
std::string format_double(double x);

// Strict numeric parsing: the whole token must be consumed.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace kglab
