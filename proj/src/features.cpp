#include "glyphshift/features.hpp"

#include <algorithm>
#include <string>

#include "glyphshift/error.hpp"
#include "glyphshift/utf8.hpp"

namespace glyphshift {

void validate(const FeatureConfig& config) {
  if (config.ngram_min < 1 || config.ngram_min > config.ngram_max) {
    throw Error(ErrorKind::parameter, "n-gram range must satisfy 1 <= min <= max");
  }
  if (config.dimension < 2) throw Error(ErrorKind::parameter, "feature dimension must be >= 2");
}

FeatureVector featurize(std::string_view text, const FeatureConfig& config) {
  FeatureVector out;
  out.dimension = config.dimension;
  auto decoded = utf8::decode(text);
  if (!decoded || decoded->empty()) return out;

  std::vector<std::string> chars;
  chars.reserve(decoded->size());
  for (char32_t c : *decoded) chars.push_back(utf8::encode(utf8::to_lower(c)));

  std::vector<std::size_t> raw;
  std::string gram;
  for (std::size_t n = config.ngram_min; n <= config.ngram_max; ++n) {
    if (n > chars.size()) break;
    for (std::size_t i = 0; i + n <= chars.size(); ++i) {
      gram.clear();
      for (std::size_t k = 0; k < n; ++k) gram += chars[i + k];
      raw.push_back(static_cast<std::size_t>(fnv1a64(gram) % config.dimension));
    }
  }
  std::sort(raw.begin(), raw.end());
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    while (j < raw.size() && raw[j] == raw[i]) ++j;
    out.indices.push_back(raw[i]);
    out.counts.push_back(static_cast<double>(j - i));
    i = j;
  }
  return out;
}

}  // namespace glyphshift
