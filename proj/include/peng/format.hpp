#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace peng {

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// Strict parse of the whole string; throws Error(parse_error) with `what` in the message.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace peng
