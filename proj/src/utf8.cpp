#include "glyphshift/utf8.hpp"

#include <cstdio>

#include "glyphshift/error.hpp"

namespace glyphshift {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::index: return "index";
    case ErrorKind::no_substitution: return "no-substitution";
    case ErrorKind::data: return "data";
    case ErrorKind::training: return "training";
    case ErrorKind::solver: return "solver";
    case ErrorKind::size: return "size";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::empty_report: return "empty-report";
    case ErrorKind::model_format: return "model-format";
  }
  return "unknown";
}

}  // namespace glyphshift

namespace glyphshift::utf8 {

std::optional<std::u32string> decode(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    std::size_t extra = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      extra = 1; cp = b0 & 0x1F; min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2; cp = b0 & 0x0F; min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3; cp = b0 & 0x07; min = 0x10000;
    } else {
      return std::nullopt;
    }
    if (i + extra >= bytes.size()) return std::nullopt;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(bytes[i + k]);
      if ((b & 0xC0) != 0x80) return std::nullopt;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return std::nullopt;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

bool is_valid(std::string_view bytes) { return decode(bytes).has_value(); }

std::string encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) out += encode(c);
  return out;
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' ||
         c == U'\f';
}

bool is_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
         (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
}

bool is_alpha(char32_t c) {
  if (c < 0x80) return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
  // Latin-1 letters, Latin extended, IPA, Greek, Cyrillic, Armenian.
  return (c >= 0xC0 && c <= 0x24F && c != 0xD7 && c != 0xF7) ||
         (c >= 0x250 && c <= 0x2AF) || (c >= 0x370 && c <= 0x3FF) ||
         (c >= 0x400 && c <= 0x52F) || (c >= 0x531 && c <= 0x587);
}

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  return c;
}

std::optional<char32_t> parse_code_point(std::string_view field) {
  if (field.size() > 2 && (field[0] == 'U' || field[0] == 'u') &&
      field[1] == '+') {
    char32_t value = 0;
    const auto hex = field.substr(2);
    if (hex.empty() || hex.size() > 6) return std::nullopt;
    for (char ch : hex) {
      value <<= 4;
      if (ch >= '0' && ch <= '9') value |= ch - '0';
      else if (ch >= 'a' && ch <= 'f') value |= ch - 'a' + 10;
      else if (ch >= 'A' && ch <= 'F') value |= ch - 'A' + 10;
      else return std::nullopt;
    }
    if (value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
      return std::nullopt;
    }
    return value;
  }
  const auto decoded = decode(field);
  if (!decoded || decoded->size() != 1) return std::nullopt;
  return (*decoded)[0];
}

std::string format_code_point(char32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(c));
  return buf;
}

}  // namespace glyphshift::utf8
