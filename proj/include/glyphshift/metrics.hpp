#ifndef GLYPHSHIFT_METRICS_HPP
#define GLYPHSHIFT_METRICS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "glyphshift/error.hpp"

// Score-vector kernels shared by the interpreters, the attack and the
// evaluation harness. All take any dense Eigen vector expression.

namespace glyphshift {

/// (s - min) / (max - min); all zeros when max == min.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> min_max_normalize(
    const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (scores.size() == 0) return Vec();
  const Scalar lo = scores.minCoeff();
  const Scalar hi = scores.maxCoeff();
  if (!(hi > lo)) return Vec::Zero(scores.size());
  Vec out = (scores.array() - lo) / (hi - lo);
  // Pin the extremes exactly; rounding can otherwise leave 1 - ulp.
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (scores(i) == hi) out(i) = Scalar(1);
    if (scores(i) == lo) out(i) = Scalar(0);
  }
  return out;
}

/// Indices by score descending, ties by ascending index.
template <typename Derived>
std::vector<std::size_t> rank_order(const Eigen::MatrixBase<Derived>& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  return order;
}

/// position[i] = place of item i in `order`.
inline std::vector<std::size_t> rank_positions(const std::vector<std::size_t>& order) {
  std::vector<std::size_t> position(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) position[order[r]] = r;
  return position;
}

/// Largest possible sum of |rank_a(i) - rank_b(i)| over permutations of n.
constexpr std::size_t max_displacement(std::size_t n) { return n * n / 2; }

/// Normalized rank displacement between two score vectors, in [0, 1].
template <typename DerivedA, typename DerivedB>
double rank_displacement(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::alignment, "score vectors differ in length");
  }
  if (a.size() == 0) throw Error(ErrorKind::alignment, "score vectors are empty");
  const auto pa = rank_positions(rank_order(a));
  const auto pb = rank_positions(rank_order(b));
  std::size_t total = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    total += pa[i] > pb[i] ? pa[i] - pb[i] : pb[i] - pa[i];
  }
  const auto denom = max_displacement(pa.size());
  return denom == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(denom);
}

/// Jaccard overlap of the top-k index sets.
template <typename DerivedA, typename DerivedB>
double topk_jaccard(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                    std::size_t k) {
  if (a.size() != b.size()) throw Error(ErrorKind::alignment, "score vectors differ in length");
  const auto n = static_cast<std::size_t>(a.size());
  if (k < 1 || k > n) throw Error(ErrorKind::parameter, "k must lie in [1, n]");
  auto ta = rank_order(a);
  auto tb = rank_order(b);
  ta.resize(k);
  tb.resize(k);
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  std::vector<std::size_t> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(2 * k - common.size());
}

/// Average ranks (1-based, ties share the mean rank).
template <typename Derived>
Eigen::VectorXd average_ranks(const Eigen::MatrixBase<Derived>& values) {
  const auto n = static_cast<std::size_t>(values.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return values(static_cast<Eigen::Index>(x)) < values(static_cast<Eigen::Index>(y));
  });
  Eigen::VectorXd ranks(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values(static_cast<Eigen::Index>(order[j + 1])) ==
                            values(static_cast<Eigen::Index>(order[i]))) {
      ++j;
    }
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks(static_cast<Eigen::Index>(order[k])) = rank;
    i = j + 1;
  }
  return ranks;
}

/// Pearson coefficient; nullopt when either side has zero variance.
template <typename DerivedA, typename DerivedB>
std::optional<double> pearson(const Eigen::MatrixBase<DerivedA>& a,
                              const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size() || a.size() < 2) return std::nullopt;
  const Eigen::ArrayXd da = a.array().template cast<double>() - a.template cast<double>().mean();
  const Eigen::ArrayXd db = b.array().template cast<double>() - b.template cast<double>().mean();
  const double sa = (da * da).sum();
  const double sb = (db * db).sum();
  if (!(sa > 0.0) || !(sb > 0.0)) return std::nullopt;
  return std::clamp((da * db).sum() / std::sqrt(sa * sb), -1.0, 1.0);
}

template <typename DerivedA, typename DerivedB>
std::optional<double> spearman(const Eigen::MatrixBase<DerivedA>& a,
                               const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) return std::nullopt;
  return pearson(average_ranks(a), average_ranks(b));
}

}  // namespace glyphshift

#endif  // GLYPHSHIFT_METRICS_HPP
