#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hdpower {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Whole-string parse; throws InputError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::uint64_t parse_uint64(std::string_view text, std::string_view what);

std::string_view trim(std::string_view text);
/// Splits on `sep` and trims each piece; empty input yields no pieces.
std::vector<std::string_view> split(std::string_view text, char sep);

}  // namespace hdpower
