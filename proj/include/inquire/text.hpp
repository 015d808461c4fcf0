#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace inquire::text {

std::string_view trim(std::string_view s);
std::string lower(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);
std::string join(std::span<const std::string> parts, std::string_view sep);

// "a X", "a X, and a Y", "a X, a Y, and a Z"; "nothing" when empty. This is
// the text-adventure listing style used in every household observation.
std::string article_list(std::span<const std::string> names);

// "a and b", "a, b and c".
std::string and_list(std::span<const std::string> names);

// Shortest decimal that round-trips, always carrying a fractional part
// ("0.0", "-0.06", "0.7").
std::string shortest_decimal(double v);

// Rounds to two decimals, then renders with shortest_decimal.
std::string coord(double v);

std::string ordinal_word(std::size_t rank);  // 1 -> "first"
int ordinal_rank(std::string_view word);     // "first" -> 1, 0 if unknown

}  // namespace inquire::text
