#ifndef GLYPHSHIFT_FEATURES_HPP
#define GLYPHSHIFT_FEATURES_HPP

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace glyphshift {

struct FeatureConfig {
  std::size_t ngram_min = 1;
  std::size_t ngram_max = 3;
  std::size_t dimension = std::size_t{1} << 16;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Sparse counts, indices strictly increasing.
struct FeatureVector {
  std::size_t dimension = 0;
  std::vector<std::size_t> indices;
  std::vector<double> counts;

  std::size_t nnz() const { return indices.size(); }
};

constexpr std::uint64_t kFnvOffsetBasis = 0xCBF29CE484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;

/// 64-bit FNV-1a over raw bytes.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = kFnvOffsetBasis;
  for (char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= kFnvPrime;
  }
  return hash;
}

/// Character n-gram counts of the lowercased text. Each n-gram is UTF-8
/// encoded and mapped to fnv1a64(ngram) mod dimension. Invalid UTF-8 yields
/// an empty vector.
FeatureVector featurize(std::string_view text, const FeatureConfig& config);

void validate(const FeatureConfig& config);

}  // namespace glyphshift

#endif  // GLYPHSHIFT_FEATURES_HPP
