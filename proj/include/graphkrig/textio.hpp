#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace graphkrig {

/// Shortest decimal form that parses back to the same double ('.' separator,
/// locale independent). NaN prints as "nan".
std::string format_number(double value);

/// Strict locale-independent parse of the whole string.
std::optional<double> parse_number(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char delim);

/// Comma-separated list of numbers, e.g. "0.1,0.5,0.9".
std::vector<double> parse_number_list(std::string_view text);

}  // namespace graphkrig
