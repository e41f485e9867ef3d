#ifndef GLYPHSHIFT_TEXTCORE_HPP
#define GLYPHSHIFT_TEXTCORE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace glyphshift {

/// UTF-8 text validated at construction.
class RawText {
 public:
  explicit RawText(std::string content);

  const std::string& content() const noexcept { return content_; }
  std::u32string code_points() const;
  bool blank() const;

  friend bool operator==(const RawText&, const RawText&) = default;

 private:
  std::string content_;
};

/// Half-open interval of code-point offsets.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  std::string text;
  Span span;

  friend bool operator==(const Token&, const Token&) = default;
};

enum class MaskMode { drop, replace_with_empty };

class TokenizedText {
 public:
  TokenizedText(RawText source, std::vector<Token> tokens);

  const RawText& source() const noexcept { return source_; }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  const Token& operator[](std::size_t i) const { return tokens_[i]; }

  /// Source text with every token replaced by the given string; gap text
  /// between tokens is kept verbatim. Replacements may differ in length.
  std::string with_tokens(const std::vector<std::string>& replacements) const;

  /// Rebuilds the source from token texts and gaps.
  std::string reassemble() const;

  /// Text with tokens whose keep flag is false removed.
  std::string masked(const std::vector<bool>& keep, MaskMode mode) const;

  std::vector<std::string> token_texts() const;

 private:
  RawText source_;
  std::u32string code_points_;
  std::vector<Token> tokens_;
};

/// Maximal non-whitespace runs, with leading and trailing ASCII punctuation
/// split off one character per token. Throws empty_input on blank text.
TokenizedText tokenize(const RawText& text);

class HomoglyphTable {
 public:
  using Entries = std::map<char32_t, std::vector<char32_t>>;

  HomoglyphTable() = default;
  explicit HomoglyphTable(Entries entries);

  const Entries& entries() const noexcept { return entries_; }
  bool contains(char32_t c) const { return entries_.count(c) != 0; }
  const std::vector<char32_t>& replacements(char32_t c) const;
  std::size_t size() const { return entries_.size(); }

 private:
  Entries entries_;
};

/// Latin to Cyrillic/Greek confusables plus digit lookalikes.
HomoglyphTable default_homoglyph_table();

/// Lines of `SOURCE<TAB>REPLACEMENT[,REPLACEMENT...]`; blank lines and lines
/// starting with '#' are skipped.
HomoglyphTable parse_homoglyph_table(std::string_view contents);
HomoglyphTable load_homoglyph_table(const std::filesystem::path& path);

enum class SubstitutionStrategy { middle_char, first_alphabetic, seeded_random, scan_best };

struct SubstitutionPolicy {
  SubstitutionStrategy strategy = SubstitutionStrategy::middle_char;
  std::uint64_t seed = 0;
};

const char* to_string(SubstitutionStrategy strategy);
SubstitutionStrategy parse_substitution_strategy(std::string_view name);

/// Replaces the code point at `position` with replacement number `variant`.
std::string substitute_char(std::string_view token, std::size_t position,
                            const HomoglyphTable& table, std::size_t variant);

std::vector<std::size_t> candidate_positions(std::string_view token,
                                             const HomoglyphTable& table,
                                             const SubstitutionPolicy& policy);

struct LabeledText {
  RawText text;
  std::size_t label;
};

struct Dataset {
  std::vector<LabeledText> records;
  std::size_t label_count = 0;
  std::vector<std::string> class_names;

  std::size_t size() const { return records.size(); }
};

/// Checks the Dataset invariants; throws data errors.
void validate(const Dataset& dataset);

enum class DatasetFormat { csv_labeled };

/// `label,text` CSV with RFC-4180 quoting. Optional directive lines before
/// the header: `#label_count=N` and `#class_names=a|b|...`.
Dataset parse_dataset(std::string_view contents);
Dataset load_dataset(const std::filesystem::path& path,
                     DatasetFormat format = DatasetFormat::csv_labeled);

std::string serialize_dataset(const Dataset& dataset);

}  // namespace glyphshift

#endif  // GLYPHSHIFT_TEXTCORE_HPP
