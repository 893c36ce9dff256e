#pragma once

#include <string>
#include <vector>

namespace pairkg {

// Canonical form used everywhere entity names are compared: Unicode NFC,
// trimmed, internal whitespace collapsed to single spaces, case-folded.
// Idempotent; empty input stays empty.
std::string normalize_name(const std::string& raw);

// Code points of a UTF-8 string. Invalid bytes decode as U+FFFD.
std::vector<char32_t> utf8_codepoints(const std::string& text);

// Re-encode code points as UTF-8.
std::string utf8_encode(const std::vector<char32_t>& cps);

// Truncate to at most `max_codepoints`, preferring the last whitespace
// boundary before the cut. Never splits a Unicode scalar value.
std::string truncate_at_whitespace(const std::string& text, std::size_t max_codepoints);

}  // namespace pairkg
