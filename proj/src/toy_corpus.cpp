#include "glyphshift/toy_corpus.hpp"

#include "glyphshift/rng.hpp"

namespace glyphshift {

const ToyVocabulary& toy_vocabulary() {
  static const ToyVocabulary vocabulary{
      {"great", "excellent", "wonderful", "superb", "brilliant", "charming", "delightful",
       "stunning"},
      {"awful", "terrible", "boring", "dull", "horrible", "tedious", "clumsy", "dreadful"},
      {"the", "movie", "film", "plot", "acting", "story", "was", "and", "a", "with", "its",
       "cast", "script", "ending", "music", "director", "really", "quite", "overall", "scenes",
       "this", "is", "very", "but", "of", "in", "to", "had", "felt", "at", "times", "pacing"},
  };
  return vocabulary;
}

Dataset make_toy_corpus(std::size_t count, std::uint64_t seed) {
  const auto& vocab = toy_vocabulary();
  Rng rng(seed);
  Dataset dataset;
  dataset.label_count = 2;
  dataset.class_names = {"negative", "positive"};
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t label = rng.uniform_index(2);
    const auto& own = label == 1 ? vocab.positive : vocab.negative;
    const auto& other = label == 1 ? vocab.negative : vocab.positive;
    const std::size_t strong = 1 + rng.uniform_index(3);
    const std::size_t length = 6 + rng.uniform_index(7);

    std::vector<std::string> words;
    for (std::size_t i = 0; i < strong; ++i) words.push_back(own[rng.uniform_index(own.size())]);
    for (std::size_t i = 0; i + 1 < strong; ++i) {
      words.push_back(other[rng.uniform_index(other.size())]);
    }
    while (words.size() < length) {
      words.push_back(vocab.neutral[rng.uniform_index(vocab.neutral.size())]);
    }
    rng.shuffle(words);

    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) text += rng.uniform_index(8) == 0 ? ", " : " ";
      text += words[i];
    }
    if (rng.coin()) text += ".";
    dataset.records.push_back({RawText(text), label});
  }
  return dataset;
}

}  // namespace glyphshift
