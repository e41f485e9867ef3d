#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <gtest/gtest.h>

#include "glyphshift/error.hpp"
#include "glyphshift/features.hpp"
#include "glyphshift/models.hpp"
#include "glyphshift/rng.hpp"
#include "glyphshift/utf8.hpp"

namespace glyphshift {
namespace {

// Independent FNV-1a over bytes, written against the published constants.
std::uint64_t reference_fnv(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::map<std::size_t, double> reference_features(const std::string& text, const FeatureConfig& c) {
  const auto decoded = utf8::decode(text);
  std::vector<std::string> chars;
  for (char32_t cp : *decoded) chars.push_back(utf8::encode(utf8::to_lower(cp)));
  std::map<std::size_t, double> out;
  for (std::size_t n = c.ngram_min; n <= c.ngram_max; ++n) {
    for (std::size_t i = 0; i + n <= chars.size(); ++i) {
      std::string g;
      for (std::size_t k = i; k < i + n; ++k) g += chars[k];
      out[reference_fnv(g) % c.dimension] += 1.0;
    }
  }
  return out;
}

ModelParams random_params(ModelKind kind, std::size_t hidden, std::uint64_t seed) {
  FeatureConfig f{1, 3, 97};
  auto p = zero_params(kind, f, 3, hidden);
  Rng rng(seed);
  for (auto& layer : p.layers) {
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = rng.uniform(-1, 1);
  }
  return p;
}

Dataset separable_set(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.label_count = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = rng.uniform_index(2);
    std::string text;
    const auto words = 3 + rng.uniform_index(4);
    for (std::size_t w = 0; w < words; ++w) {
      if (w) text += ' ';
      for (std::size_t k = 0; k < 4; ++k) text += static_cast<char>('a' + rng.uniform_index(20));
    }
    if (label == 1) text += " zz";
    d.records.push_back({RawText(text), label});
  }
  return d;
}

TEST(Fnv, PublishedVectors) {
  static_assert(fnv1a64("") == 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Featurize, Examples) {
  const auto aa = featurize("aa", {1, 1, 8});
  ASSERT_EQ(aa.nnz(), 1u);
  EXPECT_EQ(aa.indices[0], 4u);  // fnv("a") % 8
  EXPECT_EQ(aa.counts[0], 2.0);
  EXPECT_EQ(featurize("", {1, 3, 8}).nnz(), 0u);
  const auto ab = featurize("ab", {2, 2, 8});
  const auto ba = featurize("ba", {2, 2, 8});
  EXPECT_EQ(ab.indices, std::vector<std::size_t>{2});
  EXPECT_EQ(ba.indices, std::vector<std::size_t>{4});
}

TEST(Featurize, MatchesReferenceOnRandomText) {
  const std::u32string alphabet = U"abcXYZ оαЖ.,";
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::u32string s;
    const auto len = rng.uniform_index(20);
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.uniform_index(alphabet.size())];
    const auto text = utf8::encode(s);
    const FeatureConfig config{1 + rng.uniform_index(2), 3 + rng.uniform_index(2), 64};
    const auto got = featurize(text, config);
    const auto want = reference_features(text, config);
    ASSERT_EQ(got.nnz(), want.size()) << text;
    std::size_t k = 0;
    for (const auto& [index, count] : want) {
      EXPECT_EQ(got.indices[k], index);
      EXPECT_EQ(got.counts[k], count);
      ++k;
    }
  }
}

TEST(Featurize, Lowercases) {
  EXPECT_EQ(featurize("AbС", {1, 3, 1024}).indices, featurize("abс", {1, 3, 1024}).indices);
}

TEST(Predict, ZeroModelIsUniformWithLowestLabel) {
  const Model model(zero_params(ModelKind::linear, {}, 2));
  QueryLedger ledger;
  const auto r = predict(model, "anything", ledger, Channel::attack);
  EXPECT_EQ(r.label, 0u);
  EXPECT_DOUBLE_EQ(r.probabilities(0), 0.5);
  EXPECT_DOUBLE_EQ(r.probabilities(1), 0.5);
  EXPECT_EQ(ledger.attack_queries(), 1u);
  EXPECT_EQ(ledger.interpreter_queries(), 0u);
  predict(model, "x", ledger, Channel::interpreter);
  EXPECT_EQ(ledger.interpreter_queries(), 1u);
  EXPECT_EQ(ledger.total(), 2u);
}

TEST(Predict, HandSetLinearModel) {
  auto p = zero_params(ModelKind::linear, {1, 1, 8}, 2);
  p.layers[0].weights(1, 4) = 0.5;  // "a" -> index 4, count 2 in "aa"
  p.layers[0].bias(0) = 0.25;
  const Model model(p);
  const double z = 2 * 0.5 - 0.25;
  const auto probs = model.probabilities("aa");
  EXPECT_NEAR(probs(1), 1.0 / (1.0 + std::exp(-z)), 1e-15);
  EXPECT_NEAR(probs.sum(), 1.0, 1e-12);
}

TEST(Predict, SimplexOnRandomModels) {
  for (auto kind : {ModelKind::linear, ModelKind::mlp}) {
    const Model model(random_params(kind, 5, 8));
    for (const char* text : {"", "a", "great film", "ОЧЕНЬ"}) {
      const auto p = model.probabilities(text);
      EXPECT_NEAR(p.sum(), 1.0, 1e-9);
      EXPECT_GE(p.minCoeff(), 0.0);
    }
  }
}

TEST(Gradient, LinearIsWeightRow) {
  const auto p = random_params(ModelKind::linear, 0, 2);
  const Eigen::VectorXd g = gradient_wrt_features(p, "some text", 2);
  EXPECT_EQ(g, p.layers[0].weights.row(2).transpose());
}

TEST(Gradient, MlpMatchesCentralDifferences) {
  const auto p = random_params(ModelKind::mlp, 6, 4);
  const auto x = featurize("the film was fine", p.features);
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.features.dimension));
  for (std::size_t k = 0; k < x.nnz(); ++k) dense(static_cast<Eigen::Index>(x.indices[k])) = x.counts[k];
  Rng rng(17);
  for (int probe = 0; probe < 10; ++probe) {
    const auto label = rng.uniform_index(3);
    const auto j = static_cast<Eigen::Index>(rng.uniform_index(p.features.dimension));
    const auto g = gradient_wrt_features(p, x, label);
    const double h = 1e-4;
    Eigen::VectorXd up = dense, down = dense;
    up(j) += h;
    down(j) -= h;
    const auto l = static_cast<Eigen::Index>(label);
    const double fd = (logits_dense(p, up)(l) - logits_dense(p, down)(l)) / (2 * h);
    EXPECT_LE(std::abs(fd - g(j)), 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Gradient, ZeroOutputLayerGivesZero) {
  auto p = random_params(ModelKind::mlp, 4, 1);
  p.layers[1].weights.setZero();
  EXPECT_TRUE(gradient_wrt_features(p, "abc", 0).isZero());
}

TEST(Train, SeparableSetReachesHighAccuracy) {
  const auto data = separable_set(200, 5);
  // The oracle feature: 'z' occurs exactly in class-1 texts.
  for (const auto& r : data.records) {
    ASSERT_EQ(r.text.content().find('z') != std::string::npos, r.label == 1);
  }
  for (auto kind : {ModelKind::linear, ModelKind::mlp}) {
    const Model model(train(data, kind, {}, {1, 3, 1 << 12}));
    EXPECT_GE(accuracy(model, data), 0.95) << to_string(kind);
  }
}

TEST(Train, DeterministicAndSeedSensitive) {
  const auto data = separable_set(60, 6);
  TrainConfig c;
  c.epochs = 3;
  c.seed = 4;
  const auto a = train(data, ModelKind::mlp, c, {1, 2, 256});
  const auto b = train(data, ModelKind::mlp, c, {1, 2, 256});
  EXPECT_TRUE(a == b);
  EXPECT_EQ(serialize_model(a), serialize_model(b));
  c.seed = 5;
  EXPECT_FALSE(a == train(data, ModelKind::mlp, c, {1, 2, 256}));
}

TEST(Train, RejectsSingleClassAndDivergence) {
  Dataset one{{{RawText("a"), 1}, {RawText("b"), 1}}, 2, {}};
  try {
    train(one, ModelKind::linear, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::training);
  }
  TrainConfig wild;
  wild.learning_rate = 1e300;
  EXPECT_THROW(train(separable_set(40, 1), ModelKind::linear, wild), Error);
  TrainConfig bad;
  bad.epochs = 0;
  EXPECT_THROW(train(separable_set(40, 1), ModelKind::linear, bad), Error);
}

TEST(Persistence, RoundTripAndRejection) {
  const auto p = random_params(ModelKind::mlp, 3, 9);
  const auto bytes = serialize_model(p);
  EXPECT_EQ(bytes.substr(0, 8), "GSMODEL1");
  EXPECT_TRUE(deserialize_model(bytes) == p);

  auto kind_of = [](const std::string& b) {
    try {
      deserialize_model(b);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::index;
  };
  EXPECT_EQ(kind_of("GSMODEL2" + bytes.substr(8)), ErrorKind::model_format);
  EXPECT_EQ(kind_of(bytes.substr(0, bytes.size() - 1)), ErrorKind::model_format);
  EXPECT_EQ(kind_of(bytes + "x"), ErrorKind::model_format);
  // Hidden width mismatch between layers.
  auto q = p;
  q.layers[1].weights = Eigen::MatrixXd::Zero(3, 4);
  EXPECT_THROW(serialize_model(q), Error);

  const auto path = std::filesystem::temp_directory_path() / "glyphshift_model_test.gsm";
  save_model(p, path);
  const Model loaded(load_model(path));
  const Model original(p);
  EXPECT_EQ(loaded.probabilities("a film"), original.probabilities("a film"));
  std::filesystem::remove(path);
  EXPECT_THROW(load_model(path), Error);
}

}  // namespace
}  // namespace glyphshift
