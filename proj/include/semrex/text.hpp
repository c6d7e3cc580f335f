#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace semrex::text {

bool is_space(char c);
std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Collapses runs of whitespace to a single space and trims both ends.
std::string normalize_whitespace(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);
/// Lines without their terminators; a trailing newline adds no empty line.
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Strips leading and trailing ASCII punctuation.
std::string_view strip_punctuation(std::string_view s);

/// Number of UTF-8 code points.
std::size_t utf8_length(std::string_view s);

/// Replaces every occurrence of `from` with `to`.
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

}  // namespace semrex::text
