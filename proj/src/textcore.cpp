#include "glyphshift/textcore.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "glyphshift/error.hpp"
#include "glyphshift/rng.hpp"
#include "glyphshift/utf8.hpp"

namespace glyphshift {

namespace {

std::u32string decode_or_throw(std::string_view bytes) {
  auto decoded = utf8::decode(bytes);
  if (!decoded) throw Error(ErrorKind::invalid_input, "text is not valid UTF-8");
  return *decoded;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::data, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

RawText::RawText(std::string content) : content_(std::move(content)) {
  if (!utf8::is_valid(content_)) {
    throw Error(ErrorKind::invalid_input, "text is not valid UTF-8");
  }
}

std::u32string RawText::code_points() const { return *utf8::decode(content_); }

bool RawText::blank() const {
  return std::all_of(content_.begin(), content_.end(), [](char c) {
    return utf8::is_space(static_cast<unsigned char>(c));
  });
}

TokenizedText::TokenizedText(RawText source, std::vector<Token> tokens)
    : source_(std::move(source)),
      code_points_(source_.code_points()),
      tokens_(std::move(tokens)) {
  std::size_t last_end = 0;
  for (const auto& token : tokens_) {
    if (token.span.begin < last_end || token.span.end <= token.span.begin ||
        token.span.end > code_points_.size()) {
      throw Error(ErrorKind::alignment, "token spans must be increasing and non-empty");
    }
    last_end = token.span.end;
  }
}

std::string TokenizedText::with_tokens(
    const std::vector<std::string>& replacements) const {
  if (replacements.size() != tokens_.size()) {
    throw Error(ErrorKind::alignment, "replacement count differs from token count");
  }
  std::string out;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& span = tokens_[i].span;
    out += utf8::encode(std::u32string_view(code_points_).substr(cursor, span.begin - cursor));
    out += replacements[i];
    cursor = span.end;
  }
  out += utf8::encode(std::u32string_view(code_points_).substr(cursor));
  return out;
}

std::string TokenizedText::reassemble() const { return with_tokens(token_texts()); }

std::string TokenizedText::masked(const std::vector<bool>& keep, MaskMode mode) const {
  if (keep.size() != tokens_.size()) {
    throw Error(ErrorKind::alignment, "mask length differs from token count");
  }
  if (mode == MaskMode::replace_with_empty) {
    auto texts = token_texts();
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (!keep[i]) texts[i].clear();
    }
    return with_tokens(texts);
  }
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!keep[i]) continue;
    if (!out.empty()) out.push_back(' ');
    out += tokens_[i].text;
  }
  return out;
}

std::vector<std::string> TokenizedText::token_texts() const {
  std::vector<std::string> texts;
  texts.reserve(tokens_.size());
  for (const auto& token : tokens_) texts.push_back(token.text);
  return texts;
}

TokenizedText tokenize(const RawText& text) {
  const auto cps = text.code_points();
  std::vector<Token> tokens;
  auto emit = [&](std::size_t begin, std::size_t end) {
    tokens.push_back({utf8::encode(std::u32string_view(cps).substr(begin, end - begin)),
                      {begin, end}});
  };
  std::size_t i = 0;
  while (i < cps.size()) {
    if (utf8::is_space(cps[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < cps.size() && !utf8::is_space(cps[end])) ++end;
    std::size_t core_begin = i;
    while (core_begin < end && utf8::is_punct(cps[core_begin])) ++core_begin;
    std::size_t core_end = end;
    while (core_end > core_begin && utf8::is_punct(cps[core_end - 1])) --core_end;
    for (std::size_t p = i; p < core_begin; ++p) emit(p, p + 1);
    if (core_begin < core_end) emit(core_begin, core_end);
    for (std::size_t p = std::max(core_end, core_begin); p < end; ++p) emit(p, p + 1);
    i = end;
  }
  if (tokens.empty()) throw Error(ErrorKind::empty_input, "input text is empty");
  return TokenizedText(text, std::move(tokens));
}

HomoglyphTable::HomoglyphTable(Entries entries) : entries_(std::move(entries)) {
  for (const auto& [source, replacements] : entries_) {
    if (replacements.empty()) {
      throw Error(ErrorKind::data,
                  "homoglyph entry " + utf8::format_code_point(source) + " has no replacements");
    }
    for (char32_t r : replacements) {
      if (r == source) {
        throw Error(ErrorKind::data, "homoglyph replacement equals its source " +
                                         utf8::format_code_point(source));
      }
      if (entries_.count(r) != 0) {
        throw Error(ErrorKind::data, "homoglyph replacement " + utf8::format_code_point(r) +
                                         " is itself a source key");
      }
      if (utf8::is_space(r) || utf8::is_punct(r)) {
        throw Error(ErrorKind::data, "homoglyph replacement " + utf8::format_code_point(r) +
                                         " would change tokenization");
      }
    }
  }
}

const std::vector<char32_t>& HomoglyphTable::replacements(char32_t c) const {
  auto it = entries_.find(c);
  if (it == entries_.end()) {
    throw Error(ErrorKind::no_substitution,
                "no homoglyph entry for " + utf8::format_code_point(c));
  }
  return it->second;
}

HomoglyphTable default_homoglyph_table() {
  return HomoglyphTable({
      // Latin lower case -> Cyrillic / Greek
      {U'a', {U'а', U'α'}},
      {U'c', {U'с', U'ϲ'}},
      {U'd', {U'ԁ'}},
      {U'e', {U'е', U'є'}},
      {U'g', {U'ɡ'}},
      {U'h', {U'һ'}},
      {U'i', {U'і', U'ι'}},
      {U'j', {U'ј'}},
      {U'k', {U'κ'}},
      {U'l', {U'ӏ'}},
      {U'n', {U'ո'}},
      {U'o', {U'о', U'ο'}},
      {U'p', {U'р', U'ρ'}},
      {U'q', {U'ԛ'}},
      {U'r', {U'г'}},
      {U's', {U'ѕ'}},
      {U'u', {U'υ'}},
      {U'v', {U'ν'}},
      {U'w', {U'ԝ'}},
      {U'x', {U'х', U'χ'}},
      {U'y', {U'у'}},
      // Latin upper case
      {U'A', {U'А', U'Α'}},
      {U'B', {U'В', U'Β'}},
      {U'C', {U'С'}},
      {U'E', {U'Е', U'Ε'}},
      {U'H', {U'Н', U'Η'}},
      {U'I', {U'І', U'Ι'}},
      {U'J', {U'Ј'}},
      {U'K', {U'К', U'Κ'}},
      {U'M', {U'М', U'Μ'}},
      {U'N', {U'Ν'}},
      {U'O', {U'О', U'Ο'}},
      {U'P', {U'Р', U'Ρ'}},
      {U'S', {U'Ѕ'}},
      {U'T', {U'Т', U'Τ'}},
      {U'X', {U'Х', U'Χ'}},
      {U'Y', {U'Ү', U'Υ'}},
      {U'Z', {U'Ζ'}},
      // digits
      {U'0', {U'О'}},
      {U'1', {U'ӏ'}},
      {U'3', {U'З'}},
      {U'4', {U'Ч'}},
      {U'5', {U'Ƽ'}},
      {U'6', {U'б'}},
  });
}

HomoglyphTable parse_homoglyph_table(std::string_view contents) {
  HomoglyphTable::Entries entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    auto next = contents.find('\n', pos);
    if (next == std::string_view::npos) next = contents.size();
    auto line = contents.substr(pos, next - pos);
    pos = next + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    const auto where = " at line " + std::to_string(line_no);
    if (tab == std::string_view::npos) throw Error(ErrorKind::data, "missing tab" + where);
    auto source = utf8::parse_code_point(line.substr(0, tab));
    if (!source) throw Error(ErrorKind::data, "bad source code point" + where);
    std::vector<char32_t> replacements;
    auto rest = line.substr(tab + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto comma = rest.find(',', start);
      if (comma == std::string_view::npos) comma = rest.size();
      auto field = rest.substr(start, comma - start);
      auto cp = utf8::parse_code_point(field);
      if (!cp) throw Error(ErrorKind::data, "bad replacement code point" + where);
      replacements.push_back(*cp);
      start = comma + 1;
    }
    if (entries.count(*source) != 0) throw Error(ErrorKind::data, "duplicate source" + where);
    entries.emplace(*source, std::move(replacements));
  }
  return HomoglyphTable(std::move(entries));
}

HomoglyphTable load_homoglyph_table(const std::filesystem::path& path) {
  return parse_homoglyph_table(read_file(path));
}

const char* to_string(SubstitutionStrategy strategy) {
  switch (strategy) {
    case SubstitutionStrategy::middle_char: return "middle-char";
    case SubstitutionStrategy::first_alphabetic: return "first-alphabetic";
    case SubstitutionStrategy::seeded_random: return "seeded-random";
    case SubstitutionStrategy::scan_best: return "scan-best";
  }
  return "unknown";
}

SubstitutionStrategy parse_substitution_strategy(std::string_view name) {
  for (auto s : {SubstitutionStrategy::middle_char, SubstitutionStrategy::first_alphabetic,
                 SubstitutionStrategy::seeded_random, SubstitutionStrategy::scan_best}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorKind::configuration, "unknown substitution policy '" + std::string(name) + "'");
}

std::string substitute_char(std::string_view token, std::size_t position,
                            const HomoglyphTable& table, std::size_t variant) {
  auto cps = decode_or_throw(token);
  if (position >= cps.size()) {
    throw Error(ErrorKind::index, "position " + std::to_string(position) +
                                      " out of range for token of length " +
                                      std::to_string(cps.size()));
  }
  const auto& replacements = table.replacements(cps[position]);
  if (variant >= replacements.size()) {
    throw Error(ErrorKind::index, "variant " + std::to_string(variant) + " out of range");
  }
  cps[position] = replacements[variant];
  return utf8::encode(cps);
}

std::vector<std::size_t> candidate_positions(std::string_view token,
                                             const HomoglyphTable& table,
                                             const SubstitutionPolicy& policy) {
  const auto cps = decode_or_throw(token);
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (!table.contains(cps[i])) continue;
    if (policy.strategy == SubstitutionStrategy::first_alphabetic && !utf8::is_alpha(cps[i])) {
      continue;
    }
    positions.push_back(i);
  }
  switch (policy.strategy) {
    case SubstitutionStrategy::middle_char: {
      // Twice the distance to the centre keeps the comparison integral.
      const auto twice_mid = static_cast<long long>(cps.size()) - 1;
      std::stable_sort(positions.begin(), positions.end(), [&](std::size_t a, std::size_t b) {
        const auto da = std::llabs(2 * static_cast<long long>(a) - twice_mid);
        const auto db = std::llabs(2 * static_cast<long long>(b) - twice_mid);
        return da < db;
      });
      break;
    }
    case SubstitutionStrategy::seeded_random: {
      Rng rng(policy.seed);
      rng.shuffle(positions);
      break;
    }
    case SubstitutionStrategy::first_alphabetic:
    case SubstitutionStrategy::scan_best:
      break;
  }
  return positions;
}

void validate(const Dataset& dataset) {
  if (dataset.label_count < 2) throw Error(ErrorKind::data, "dataset needs at least two classes");
  if (dataset.records.empty()) throw Error(ErrorKind::data, "dataset has no records");
  if (!dataset.class_names.empty() && dataset.class_names.size() != dataset.label_count) {
    throw Error(ErrorKind::data, "class name count differs from label count");
  }
  for (const auto& record : dataset.records) {
    if (record.label >= dataset.label_count) {
      throw Error(ErrorKind::data, "label " + std::to_string(record.label) + " out of range");
    }
  }
}

namespace {

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// RFC-4180: quoted fields may contain commas, doubled quotes and newlines.
std::vector<CsvRow> parse_csv(std::string_view text, std::size_t first_line) {
  std::vector<CsvRow> rows;
  std::size_t line = first_line;
  std::size_t i = 0;
  while (i < text.size()) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool row_done = false;
    while (!row_done) {
      field.clear();
      if (i < text.size() && text[i] == '"') {
        ++i;
        bool closed = false;
        while (i < text.size()) {
          if (text[i] == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              field.push_back('"');
              i += 2;
            } else {
              ++i;
              closed = true;
              break;
            }
          } else {
            if (text[i] == '\n') ++line;
            field.push_back(text[i++]);
          }
        }
        if (!closed) {
          throw Error(ErrorKind::data, "unterminated quote at line " + std::to_string(row.line));
        }
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          throw Error(ErrorKind::data,
                      "unexpected character after quote at line " + std::to_string(line));
        }
      } else {
        while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"') {
            throw Error(ErrorKind::data, "stray quote at line " + std::to_string(line));
          }
          field.push_back(text[i++]);
        }
      }
      row.fields.push_back(field);
      if (i < text.size() && text[i] == ',') {
        ++i;
      } else {
        if (i < text.size() && text[i] == '\r') ++i;
        if (i < text.size() && text[i] == '\n') ++i;
        ++line;
        row_done = true;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t parse_label(const std::string& field, std::size_t line) {
  if (field.empty() || !std::all_of(field.begin(), field.end(),
                                    [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorKind::data, "bad label '" + field + "' at line " + std::to_string(line));
  }
  if (field.size() > 9) throw Error(ErrorKind::data, "label too large at line " + std::to_string(line));
  return static_cast<std::size_t>(std::stoul(field));
}

}  // namespace

Dataset parse_dataset(std::string_view contents) {
  if (contents.size() >= 3 && contents.substr(0, 3) == "\xEF\xBB\xBF") contents.remove_prefix(3);
  if (!utf8::is_valid(contents)) throw Error(ErrorKind::data, "dataset is not valid UTF-8");

  Dataset dataset;
  std::optional<std::size_t> declared_count;
  std::size_t line = 1;
  while (!contents.empty() && contents.front() == '#') {
    auto nl = contents.find('\n');
    auto directive = contents.substr(0, nl);
    if (!directive.empty() && directive.back() == '\r') directive.remove_suffix(1);
    const auto where = " at line " + std::to_string(line);
    if (directive.rfind("#label_count=", 0) == 0) {
      declared_count = parse_label(std::string(directive.substr(13)), line);
    } else if (directive.rfind("#class_names=", 0) == 0) {
      auto names = directive.substr(13);
      std::size_t start = 0;
      while (start <= names.size()) {
        auto bar = names.find('|', start);
        if (bar == std::string_view::npos) bar = names.size();
        dataset.class_names.emplace_back(names.substr(start, bar - start));
        start = bar + 1;
      }
    } else {
      throw Error(ErrorKind::data, "unknown directive" + where);
    }
    contents.remove_prefix(nl == std::string_view::npos ? contents.size() : nl + 1);
    ++line;
  }

  auto rows = parse_csv(contents, line);
  if (rows.empty()) throw Error(ErrorKind::data, "missing header");
  if (rows.front().fields != std::vector<std::string>{"label", "text"}) {
    throw Error(ErrorKind::data, "header must be 'label,text' at line " +
                                     std::to_string(rows.front().line));
  }
  std::size_t max_label = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;
    if (row.fields.size() != 2) {
      throw Error(ErrorKind::data, "expected 2 fields at line " + std::to_string(row.line));
    }
    const auto label = parse_label(row.fields[0], row.line);
    if (declared_count && label >= *declared_count) {
      throw Error(ErrorKind::data, "label " + row.fields[0] + " out of range at line " +
                                       std::to_string(row.line));
    }
    max_label = std::max(max_label, label);
    dataset.records.push_back({RawText(row.fields[1]), label});
  }
  dataset.label_count = declared_count.value_or(max_label + 1);
  validate(dataset);
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat /*format*/) {
  return parse_dataset(read_file(path));
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  out += "#label_count=" + std::to_string(dataset.label_count) + "\n";
  if (!dataset.class_names.empty()) {
    out += "#class_names=";
    for (std::size_t i = 0; i < dataset.class_names.size(); ++i) {
      if (i) out += '|';
      out += dataset.class_names[i];
    }
    out += '\n';
  }
  out += "label,text\n";
  for (const auto& record : dataset.records) {
    out += std::to_string(record.label);
    out += ",\"";
    for (char c : record.text.content()) {
      if (c == '"') out += '"';
      out += c;
    }
    out += "\"\n";
  }
  return out;
}

}  // namespace glyphshift
