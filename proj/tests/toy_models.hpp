#ifndef GLYPHSHIFT_TESTS_TOY_MODELS_HPP
#define GLYPHSHIFT_TESTS_TOY_MODELS_HPP

#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "glyphshift/models.hpp"

namespace glyphshift::testing {

// P(class 1) = bias + sum of weights of the words present (whitespace
// split), plus `pair_bonus` when both words of `pair` are present.
class WordModel final : public TextClassifier {
 public:
  WordModel(std::map<std::string, double> weights, double bias,
            std::pair<std::string, std::string> pair = {}, double pair_bonus = 0.0)
      : weights_(std::move(weights)), bias_(bias), pair_(std::move(pair)), bonus_(pair_bonus) {}

  std::size_t label_count() const override { return 2; }

  Eigen::VectorXd probabilities(std::string_view text) const override {
    std::istringstream in{std::string(text)};
    std::string word;
    double p = bias_;
    bool first = false, second = false;
    while (in >> word) {
      auto it = weights_.find(word);
      if (it != weights_.end()) p += it->second;
      first |= word == pair_.first;
      second |= word == pair_.second;
    }
    if (first && second) p += bonus_;
    Eigen::VectorXd out(2);
    out << 1.0 - p, p;
    return out;
  }

 private:
  std::map<std::string, double> weights_;
  double bias_;
  std::pair<std::string, std::string> pair_;
  double bonus_;
};

class ConstantModel final : public TextClassifier {
 public:
  explicit ConstantModel(double p1) : p1_(p1) {}
  std::size_t label_count() const override { return 2; }
  Eigen::VectorXd probabilities(std::string_view) const override {
    Eigen::VectorXd out(2);
    out << 1.0 - p1_, p1_;
    return out;
  }

 private:
  double p1_;
};

}  // namespace glyphshift::testing

#endif  // GLYPHSHIFT_TESTS_TOY_MODELS_HPP
