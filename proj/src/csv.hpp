#pragma once
// Minimal RFC 4180 field handling shared by the CSV readers and writers.

#include <string>
#include <string_view>
#include <vector>

namespace storyframe::csv {

/// Splits one line into fields; double-quoted fields may contain commas and "" escapes.
/// Returns false on an unterminated quote.
bool split_line(std::string_view line, std::vector<std::string>& fields);

/// Quotes a field when it contains a comma, quote, or leading/trailing space.
std::string escape(std::string_view field);

std::string trim(std::string_view s);

}  // namespace storyframe::csv
