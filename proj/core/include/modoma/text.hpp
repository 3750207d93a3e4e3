#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace modoma::text {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// RFC 4180 field quoting: only quotes when the field needs it.
std::string csv_field(std::string_view field);

/// Splits one CSV record (no embedded newlines) into fields.
std::vector<std::string> parse_csv_line(std::string_view line);

std::string_view trim(std::string_view s);

bool contains_whitespace(std::string_view s);

} // namespace modoma::text
