#ifndef GLYPHSHIFT_UTF8_HPP
#define GLYPHSHIFT_UTF8_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace glyphshift::utf8 {

/// Decodes UTF-8 into scalar values. Returns nullopt on any malformed
/// sequence (overlong forms, surrogates, truncation, values > U+10FFFF).
std::optional<std::u32string> decode(std::string_view bytes);

bool is_valid(std::string_view bytes);

std::string encode(std::u32string_view text);
std::string encode(char32_t code_point);

bool is_space(char32_t c);
bool is_punct(char32_t c);
bool is_alpha(char32_t c);

// ASCII, Latin-1, Greek and Cyrillic upper case only.
char32_t to_lower(char32_t c);

/// Parses "U+XXXX" or a single literal code point.
std::optional<char32_t> parse_code_point(std::string_view field);

std::string format_code_point(char32_t c);

}  // namespace glyphshift::utf8

#endif  // GLYPHSHIFT_UTF8_HPP
