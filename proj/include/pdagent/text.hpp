#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pdagent {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Collapses every internal whitespace run to a single space (after trimming).
std::string collapse_whitespace(std::string_view s);

/// Lowercase alphanumeric word tokens, split on any other character.
std::vector<std::string> word_tokens(std::string_view text);

bool contains(std::string_view haystack, std::string_view needle);

/// Case-insensitive substring count; counts overlapping occurrences once each,
/// scanning left to right past each match.
std::size_t count_occurrences_ci(std::string_view haystack, std::string_view needle);

/// FNV-1a 64-bit.
std::uint64_t fnv1a64(std::string_view data);
std::string to_hex(std::uint64_t value);

/// Replaces every "{{key}}" in the template with its value.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace pdagent
