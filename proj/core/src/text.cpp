#include "mgr/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <cctype>

#include "mgr/error.hpp"

namespace mgr {

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Decodes one UTF-8 codepoint starting at s[i]. Returns the number of bytes
// consumed, or 0 on malformed input.
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& out) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    out = b0;
    return 1;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  // Reject overlong encodings, surrogates, and out-of-range values.
  if (len == 2 && cp < 0x80) return 0;
  if (len == 3 && cp < 0x800) return 0;
  if (len == 4 && cp < 0x10000) return 0;
  if (cp >= 0xD800 && cp <= 0xDFFF) return 0;
  if (cp > 0x10FFFF) return 0;
  out = cp;
  return len;
}

}  // namespace

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  char32_t cp = 0;
  while (i < s.size()) {
    const std::size_t n = decode_utf8(s, i, cp);
    if (n == 0) return false;
    i += n;
  }
  return true;
}

std::string trim_ascii_whitespace(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string canonicalize_keyword(std::string_view raw) {
  if (!is_valid_utf8(raw)) {
    throw Error("keyword is not valid UTF-8");
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || nfc == nullptr) {
    throw Error("ICU NFC normalizer unavailable");
  }
  const icu::UnicodeString in =
      icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int>(raw.size())));
  const icu::UnicodeString normalized = nfc->normalize(in, status);
  if (U_FAILURE(status)) {
    throw Error("NFC normalization failed");
  }
  std::string out;
  normalized.toUTF8String(out);
  return trim_ascii_whitespace(out);
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_ascii_space(s[i])) ++i;
    if (i > start) tokens.emplace_back(s.substr(start, i - start));
  }
  return tokens;
}

std::size_t whitespace_token_count(std::string_view s) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_ascii_space(s[i])) ++i;
    if (i > start) ++count;
  }
  return count;
}

std::vector<std::string> codepoint_trigrams(std::string_view s) {
  // Byte offsets of codepoint starts, plus the end offset.
  std::vector<std::size_t> starts;
  std::size_t i = 0;
  char32_t cp = 0;
  while (i < s.size()) {
    const std::size_t n = decode_utf8(s, i, cp);
    if (n == 0) throw Error("invalid UTF-8 in trigram input");
    starts.push_back(i);
    i += n;
  }
  starts.push_back(s.size());

  std::vector<std::string> grams;
  if (starts.size() < 4) return grams;  // fewer than 3 codepoints
  for (std::size_t k = 0; k + 3 < starts.size(); ++k) {
    grams.emplace_back(s.substr(starts[k], starts[k + 3] - starts[k]));
  }
  return grams;
}

std::vector<std::string> extract_terms(std::string_view text) {
  std::vector<std::string> terms;
  for (const std::string& token : whitespace_tokens(text)) {
    std::string lowered = to_lower_ascii(token);
    for (std::string& gram : codepoint_trigrams(lowered)) {
      terms.push_back(std::move(gram));
    }
    terms.push_back(std::move(lowered));
  }
  return terms;
}

}  // namespace mgr
