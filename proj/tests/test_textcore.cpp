#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "glyphshift/error.hpp"
#include "glyphshift/rng.hpp"
#include "glyphshift/textcore.hpp"
#include "glyphshift/toy_corpus.hpp"
#include "glyphshift/utf8.hpp"

namespace glyphshift {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no glyphshift::Error thrown";
  return ErrorKind::index;
}

TEST(Utf8, RoundTripAndRejects) {
  const std::string s = "g\xD0\xBEod \xF0\x9F\x98\x80";
  auto cps = utf8::decode(s);
  ASSERT_TRUE(cps);
  EXPECT_EQ(cps->size(), 6u);
  EXPECT_EQ((*cps)[1], U'о');
  EXPECT_EQ(utf8::encode(*cps), s);
  EXPECT_FALSE(utf8::decode("\xC3"));          // truncated
  EXPECT_FALSE(utf8::decode("\xC0\xAF"));      // overlong
  EXPECT_FALSE(utf8::decode("\xED\xA0\x80"));  // surrogate
  EXPECT_THROW(RawText("\xFF"), Error);
}

TEST(Utf8, CodePointFields) {
  EXPECT_EQ(utf8::parse_code_point("U+043E"), U'о');
  EXPECT_EQ(utf8::parse_code_point("o"), U'o');
  EXPECT_FALSE(utf8::parse_code_point("oo"));
  EXPECT_EQ(utf8::format_code_point(U'о'), "U+043E");
}

TEST(Tokenize, WhitespaceSplitWithSpans) {
  const auto t = tokenize(RawText("a great movie"));
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.token_texts(), (std::vector<std::string>{"a", "great", "movie"}));
  EXPECT_EQ(t[0].span, (Span{0, 1}));
  EXPECT_EQ(t[1].span, (Span{2, 7}));
  EXPECT_EQ(t[2].span, (Span{8, 13}));
}

TEST(Tokenize, PunctuationSplit) {
  const auto t = tokenize(RawText("good, not bad."));
  EXPECT_EQ(t.token_texts(), (std::vector<std::string>{"good", ",", "not", "bad", "."}));
  const auto u = tokenize(RawText("(\"wow\")"));
  EXPECT_EQ(u.token_texts(), (std::vector<std::string>{"(", "\"", "wow", "\"", ")"}));
}

TEST(Tokenize, EmptyInput) {
  EXPECT_EQ(kind_of([] { tokenize(RawText("")); }), ErrorKind::empty_input);
  EXPECT_EQ(kind_of([] { tokenize(RawText(" \t\n")); }), ErrorKind::empty_input);
}

TEST(Tokenize, SpansCountCodePoints) {
  const auto t = tokenize(RawText("\xD0\xB0\xD0\xB1 cd"));
  EXPECT_EQ(t[0].span, (Span{0, 2}));
  EXPECT_EQ(t[1].span, (Span{3, 5}));
}

TEST(Tokenize, MaskingDropsAndJoins) {
  const auto t = tokenize(RawText("a  great,   movie"));
  EXPECT_EQ(t.masked({true, false, true, true}, MaskMode::drop), "a , movie");
  EXPECT_EQ(t.masked({false, false, false, false}, MaskMode::drop), "");
  EXPECT_EQ(t.masked({true, false, true, true}, MaskMode::replace_with_empty), "a  ,   movie");
}

TEST(Tokenize, WithTokensKeepsGaps) {
  const auto t = tokenize(RawText("a  great,\tmovie"));
  EXPECT_EQ(t.with_tokens({"A", "GR", ";", "m"}), "A  GR;\tm");
}

// Random texts over a small alphabet with mixed whitespace, punctuation and
// multi-byte letters.
TEST(Tokenize, PropertyRoundTripAndStability) {
  const std::u32string alphabet = U"ab cd,.!\tоαe'";
  const auto table = default_homoglyph_table();
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::u32string s;
    const auto len = 1 + rng.uniform_index(24);
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.uniform_index(alphabet.size())];
    const RawText raw(utf8::encode(s));
    if (raw.blank()) continue;
    const auto t = tokenize(raw);
    ASSERT_EQ(t.reassemble(), raw.content());
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto positions = candidate_positions(t[k].text, table, {});
      if (positions.empty()) continue;
      auto replaced = t.token_texts();
      replaced[k] = substitute_char(t[k].text, positions.front(), table, 0);
      const auto again = tokenize(RawText(t.with_tokens(replaced)));
      ASSERT_EQ(again.size(), t.size());
      for (std::size_t j = 0; j < t.size(); ++j) ASSERT_EQ(again[j].span, t[j].span);
    }
  }
}

TEST(Homoglyph, Substitute) {
  const HomoglyphTable table(HomoglyphTable::Entries{{U'o', {U'о'}}});
  EXPECT_EQ(substitute_char("good", 1, table, 0), "gоod");
  EXPECT_EQ(kind_of([&] { substitute_char("good", 9, table, 0); }), ErrorKind::index);
  EXPECT_EQ(kind_of([&] { substitute_char("+++", 0, table, 0); }), ErrorKind::no_substitution);
  EXPECT_EQ(kind_of([&] { substitute_char("good", 1, table, 1); }), ErrorKind::index);
}

TEST(Homoglyph, SubstitutionLocality) {
  const auto table = default_homoglyph_table();
  for (const std::string word : {"excellent", "Terrible", "x1y0", "naïve"}) {
    const auto cps = *utf8::decode(word);
    for (std::size_t p = 0; p < cps.size(); ++p) {
      if (!table.contains(cps[p])) continue;
      for (std::size_t v = 0; v < table.replacements(cps[p]).size(); ++v) {
        const auto out = *utf8::decode(substitute_char(word, p, table, v));
        ASSERT_EQ(out.size(), cps.size());
        std::size_t diff = 0;
        for (std::size_t i = 0; i < cps.size(); ++i) diff += out[i] != cps[i];
        EXPECT_EQ(diff, 1u);
      }
    }
  }
}

TEST(Homoglyph, DefaultTableShape) {
  const auto table = default_homoglyph_table();
  EXPECT_GE(table.size(), 30u);
  for (const auto& [source, replacements] : table.entries()) {
    ASSERT_FALSE(replacements.empty());
    for (char32_t r : replacements) {
      EXPECT_NE(r, source);
      EXPECT_FALSE(table.contains(r)) << utf8::format_code_point(r);
    }
  }
  EXPECT_TRUE(table.contains(U'0'));
}

TEST(Homoglyph, ParseTableFile) {
  const auto table = parse_homoglyph_table("# comment\n\no\tU+043E,\xCE\xBF\na\t\xD0\xB0\n");
  EXPECT_EQ(table.size(), 2u);
  EXPECT_EQ(table.replacements(U'o'), (std::vector<char32_t>{U'о', U'ο'}));
  EXPECT_THROW(parse_homoglyph_table("o U+043E\n"), Error);
  EXPECT_THROW(parse_homoglyph_table("o\to\n"), Error);
}

TEST(CandidatePositions, Policies) {
  const HomoglyphTable og({{U'o', {U'о'}}, {U'g', {U'ɡ'}}});
  EXPECT_EQ(candidate_positions("good", og, {SubstitutionStrategy::middle_char, 0}),
            (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_TRUE(candidate_positions("+++", og, {SubstitutionStrategy::middle_char, 0}).empty());
  EXPECT_TRUE(candidate_positions("+++", og, {SubstitutionStrategy::scan_best, 0}).empty());
  const HomoglyphTable ab({{U'a', {U'а'}}, {U'b', {U'в'}}});
  EXPECT_EQ(candidate_positions("ab", ab, {SubstitutionStrategy::first_alphabetic, 0}),
            (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(candidate_positions("good", og, {SubstitutionStrategy::scan_best, 0}),
            (std::vector<std::size_t>{0, 1, 2}));
}

TEST(CandidatePositions, SeededRandomIsDeterministicPermutation) {
  const auto table = default_homoglyph_table();
  const SubstitutionPolicy policy{SubstitutionStrategy::seeded_random, 5};
  const auto a = candidate_positions("wonderful", table, policy);
  EXPECT_EQ(a, candidate_positions("wonderful", table, policy));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, candidate_positions("wonderful", table, {SubstitutionStrategy::scan_best, 0}));
}

TEST(Dataset, ParsesAndInfersLabelCount) {
  const auto d = parse_dataset("label,text\n0,a\n1,b\n1,c\n0,d\n");
  EXPECT_EQ(d.size(), 4u);
  EXPECT_EQ(d.label_count, 2u);
  EXPECT_EQ(d.records[2].text.content(), "c");
}

TEST(Dataset, HeaderDeclaredRange) {
  try {
    parse_dataset("#label_count=2\nlabel,text\n0,a\n2,b\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(Dataset, QuotedFields) {
  const auto d = parse_dataset("label,text\n1,\"good, \"\"really\"\"\nfine\"\n");
  EXPECT_EQ(d.records[0].text.content(), "good, \"really\"\nfine");
  EXPECT_EQ(parse_dataset(serialize_dataset(d)).records[0].text, d.records[0].text);
}

TEST(Dataset, MalformedRows) {
  EXPECT_THROW(parse_dataset("label,text\nx,a\n"), Error);
  EXPECT_THROW(parse_dataset("label,text\n0\n"), Error);
  EXPECT_THROW(parse_dataset("text,label\n0,a\n"), Error);
  EXPECT_THROW(parse_dataset("label,text\n0,\"open\n"), Error);
  EXPECT_THROW(load_dataset("/nonexistent/file.csv"), Error);
}

TEST(ToyCorpus, BundledFilesMatchGenerator) {
  const std::string dir = GLYPHSHIFT_SOURCE_DIR "/data/";
  EXPECT_EQ(read_file(dir + "toy_train.csv"),
            serialize_dataset(make_toy_corpus(kToyTrainSize, kToyTrainSeed)));
  EXPECT_EQ(read_file(dir + "toy_test.csv"),
            serialize_dataset(make_toy_corpus(kToyTestSize, kToyTestSeed)));
}

}  // namespace
}  // namespace glyphshift
