#include <algorithm>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "glyphshift/error.hpp"
#include "glyphshift/interpret.hpp"
#include "glyphshift/metrics.hpp"
#include "glyphshift/rng.hpp"

namespace glyphshift {
namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// Independent reference: rank by (-score, index) pairs.
std::vector<std::size_t> reference_positions(const Eigen::VectorXd& s) {
  std::vector<std::pair<double, std::size_t>> keyed;
  for (Eigen::Index i = 0; i < s.size(); ++i) keyed.emplace_back(-s(i), static_cast<std::size_t>(i));
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> pos(keyed.size());
  for (std::size_t r = 0; r < keyed.size(); ++r) pos[keyed[r].second] = r;
  return pos;
}

double reference_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const auto pa = reference_positions(a);
  const auto pb = reference_positions(b);
  double total = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    total += std::abs(static_cast<double>(pa[i]) - static_cast<double>(pb[i]));
  }
  const double n = static_cast<double>(pa.size());
  return pa.size() < 2 ? 0.0 : total / std::floor(n * n / 2);
}

double reference_iou(const Eigen::VectorXd& a, const Eigen::VectorXd& b, std::size_t k) {
  const auto pa = reference_positions(a);
  const auto pb = reference_positions(b);
  std::set<std::size_t> ta, tb, all;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i] < k) ta.insert(i);
    if (pb[i] < k) tb.insert(i);
  }
  std::size_t common = 0;
  for (auto i : ta) common += tb.count(i);
  all = ta;
  all.insert(tb.begin(), tb.end());
  return static_cast<double>(common) / static_cast<double>(all.size());
}

Eigen::VectorXd random_scores(Rng& rng, std::size_t n) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  // Few distinct levels so ties are frequent.
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = static_cast<double>(rng.uniform_index(4));
  return v;
}

TEST(Normalize, Examples) {
  EXPECT_EQ(min_max_normalize(vec({2, 4, 6})), vec({0, 0.5, 1}));
  EXPECT_EQ(min_max_normalize(vec({3, 3})), vec({0, 0}));
  EXPECT_EQ(min_max_normalize(vec({-1, 1})), vec({0, 1}));
  InterpretationMap m{{"a", "b", "c"}, vec({-2, 0, 2}), InterpreterKind::lime, 1};
  const auto n = normalize_scores(m);
  EXPECT_EQ(n.scores, vec({0, 0.5, 1}));
  EXPECT_EQ(n.tokens, m.tokens);
  EXPECT_EQ(n.target_class, 1u);
  EXPECT_EQ(rank_tokens(n), (std::vector<std::size_t>{2, 1, 0}));
}

TEST(Normalize, PropertyRangeAndOrder) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + rng.uniform_index(12);
    Eigen::VectorXd s(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = rng.uniform(-5, 5);
    const auto z = min_max_normalize(s);
    ASSERT_GE(z.minCoeff(), 0.0);
    ASSERT_LE(z.maxCoeff(), 1.0);
    if (n > 1) {
      ASSERT_EQ(z.maxCoeff(), 1.0);
      ASSERT_EQ(z.minCoeff(), 0.0);
    }
    ASSERT_EQ(rank_order(z), rank_order(s));
  }
}

TEST(RankOrder, TiesByIndex) {
  EXPECT_EQ(rank_order(vec({0.5, 0.9, 0.5, 0.1})), (std::vector<std::size_t>{1, 0, 2, 3}));
  EXPECT_EQ(rank_order(vec({1, 1, 1})), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Similarity, Examples) {
  // Swapping the top two of four: displacement 2 over floor(16/2).
  EXPECT_DOUBLE_EQ(rank_displacement(vec({0.9, 0.5, 0.1, 0.0}), vec({0.5, 0.9, 0.1, 0.0})), 0.25);
  EXPECT_DOUBLE_EQ(rank_displacement(vec({1, 0}), vec({0, 1})), 1.0);
  EXPECT_DOUBLE_EQ(rank_displacement(vec({1, 0, 2}), vec({1, 0, 2})), 0.0);
  EXPECT_DOUBLE_EQ(rank_displacement(vec({7}), vec({3})), 0.0);
  EXPECT_THROW(rank_displacement(vec({1, 0}), vec({1})), Error);
}

TEST(Similarity, MaxDisplacementMatchesExhaustiveSearch) {
  for (std::size_t n = 1; n <= 7; ++n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::size_t best = 0;
    do {
      std::size_t total = 0;
      for (std::size_t i = 0; i < n; ++i) total += p[i] > i ? p[i] - i : i - p[i];
      best = std::max(best, total);
    } while (std::next_permutation(p.begin(), p.end()));
    EXPECT_EQ(max_displacement(n), best) << n;
  }
}

TEST(Similarity, PropertyAgainstReference) {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + rng.uniform_index(12);
    const auto a = random_scores(rng, n);
    const auto b = random_scores(rng, n);
    const double s = rank_displacement(a, b);
    ASSERT_NEAR(s, reference_similarity(a, b), 1e-12);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
    ASSERT_EQ(s, rank_displacement(b, a));
    ASSERT_EQ(rank_displacement(a, a), 0.0);
  }
}

TEST(Iou, Examples) {
  EXPECT_DOUBLE_EQ(topk_jaccard(vec({4, 3, 2, 1}), vec({4, 3, 1, 2}), 3), 0.5);
  EXPECT_DOUBLE_EQ(topk_jaccard(vec({4, 3, 2, 1}), vec({1, 2, 3, 4}), 2), 0.0);
  EXPECT_DOUBLE_EQ(topk_jaccard(vec({4, 3, 2, 1}), vec({1, 2, 3, 4}), 4), 1.0);
  EXPECT_THROW(topk_jaccard(vec({1, 2}), vec({1, 2}), 0), Error);
  EXPECT_THROW(topk_jaccard(vec({1, 2}), vec({1, 2}), 3), Error);
}

TEST(Iou, PropertyAgainstReference) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + rng.uniform_index(12);
    const auto k = 1 + rng.uniform_index(n);
    const auto a = random_scores(rng, n);
    const auto b = random_scores(rng, n);
    const double j = topk_jaccard(a, b, k);
    ASSERT_NEAR(j, reference_iou(a, b, k), 1e-12);
    ASSERT_EQ(topk_jaccard(a, a, k), 1.0);
  }
}

TEST(Correlation, Examples) {
  EXPECT_NEAR(*pearson(vec({1, 2, 3}), vec({2, 4, 6})), 1.0, 1e-12);
  EXPECT_NEAR(*pearson(vec({1, 2, 3}), vec({3, 2, 1})), -1.0, 1e-12);
  EXPECT_FALSE(pearson(vec({1, 1, 1}), vec({1, 2, 3})));
  EXPECT_FALSE(pearson(vec({1}), vec({1})));
  EXPECT_EQ(average_ranks(vec({10, 20, 10, 30})), vec({1.5, 3, 1.5, 4}));
  EXPECT_NEAR(*spearman(vec({1, 2, 3, 4}), vec({1, 4, 9, 16})), 1.0, 1e-12);
  // Hand-computed: x = 1..4, y = 1,3,2,4 -> r = 0.8
  EXPECT_NEAR(*pearson(vec({1, 2, 3, 4}), vec({1, 3, 2, 4})), 0.8, 1e-12);
}

}  // namespace
}  // namespace glyphshift
