#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mgr {

/// Canonical keyword form: Unicode NFC plus surrounding-whitespace trim.
/// No case folding. Throws mgr::Error on invalid UTF-8.
std::string canonicalize_keyword(std::string_view raw);

/// True iff `s` is well-formed UTF-8.
bool is_valid_utf8(std::string_view s);

std::string trim_ascii_whitespace(std::string_view s);

/// ASCII-only lowercasing; non-ASCII bytes pass through untouched.
std::string to_lower_ascii(std::string_view s);

/// Splits on ASCII whitespace runs.
std::vector<std::string> whitespace_tokens(std::string_view s);

/// Number of whitespace-delimited units. Default token counter for the
/// identifier-length accounting.
std::size_t whitespace_token_count(std::string_view s);

/// Codepoint trigrams of a UTF-8 string (sliding window of 3 codepoints,
/// returned as UTF-8 substrings). Strings shorter than 3 codepoints yield
/// nothing.
std::vector<std::string> codepoint_trigrams(std::string_view s);

/// Scorer term extraction: lowercased whitespace tokens plus the codepoint
/// trigrams of each token. Trigrams cover scripts that do not use spaces.
std::vector<std::string> extract_terms(std::string_view text);

}  // namespace mgr
