#ifndef GLYPHSHIFT_TOY_CORPUS_HPP
#define GLYPHSHIFT_TOY_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "glyphshift/textcore.hpp"

namespace glyphshift {

// Synthetic two-class review corpus. A review with label c carries k
// polarity words of class c and k-1 of the other class (k in 1..3) among
// neutral filler, so the label is always decided by a one-word margin.

struct ToyVocabulary {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  std::vector<std::string> neutral;
};

const ToyVocabulary& toy_vocabulary();

Dataset make_toy_corpus(std::size_t count, std::uint64_t seed);

/// Seeds of the bundled data/toy_train.csv and data/toy_test.csv.
constexpr std::uint64_t kToyTrainSeed = 20240501;
constexpr std::uint64_t kToyTestSeed = 20240502;
constexpr std::size_t kToyTrainSize = 500;
constexpr std::size_t kToyTestSize = 200;

}  // namespace glyphshift

#endif  // GLYPHSHIFT_TOY_CORPUS_HPP
