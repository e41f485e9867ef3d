#include "glyphshift/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glyphshift/error.hpp"
#include "glyphshift/metrics.hpp"
#include "glyphshift/rng.hpp"

namespace glyphshift {

const char* to_string(InterpreterKind kind) {
  switch (kind) {
    case InterpreterKind::lime: return "lime";
    case InterpreterKind::kshap: return "kshap";
    case InterpreterKind::saliency: return "saliency";
  }
  return "unknown";
}

InterpreterKind parse_interpreter_kind(std::string_view name) {
  if (name == "lime") return InterpreterKind::lime;
  if (name == "kshap" || name == "shap") return InterpreterKind::kshap;
  if (name == "saliency" || name == "sm") return InterpreterKind::saliency;
  throw Error(ErrorKind::configuration, "unknown interpreter '" + std::string(name) + "'");
}

NormalizedMap normalize_scores(const InterpretationMap& map) {
  return {map.tokens, min_max_normalize(map.scores), map.interpreter, map.target_class};
}

std::vector<std::size_t> rank_tokens(const NormalizedMap& map) { return rank_order(map.scores); }

void validate(const InterpreterConfig& config) {
  if (!(config.kernel_width > 0.0)) throw Error(ErrorKind::parameter, "kernel width must be > 0");
  if (!(config.ridge_lambda >= 0.0)) throw Error(ErrorKind::parameter, "ridge lambda must be >= 0");
}

Eigen::VectorXd fit_weighted_ridge(const Eigen::MatrixXd& masks, const Eigen::VectorXd& values,
                                   const Eigen::VectorXd& weights, double lambda) {
  const Eigen::Index rows = masks.rows();
  const Eigen::Index p = masks.cols() + 1;
  if (values.size() != rows || weights.size() != rows) {
    throw Error(ErrorKind::alignment, "surrogate inputs differ in length");
  }
  if ((weights.array() < 0.0).any()) throw Error(ErrorKind::parameter, "negative sample weight");

  const Eigen::VectorXd root = weights.array().sqrt();
  const Eigen::Index extra = lambda > 0.0 ? p - 1 : 0;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows + extra, p);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(rows + extra);
  design.topLeftCorner(rows, 1) = root;
  design.topRightCorner(rows, p - 1) = root.asDiagonal() * masks;
  target.head(rows) = root.cwiseProduct(values);
  if (extra > 0) {
    // Ridge rows: sqrt(lambda) I on the coefficients, intercept free.
    design.bottomRightCorner(extra, extra).diagonal().setConstant(std::sqrt(lambda));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) {
    throw Error(ErrorKind::solver,
                "surrogate normal equations are singular; use ridge_lambda > 0");
  }
  return qr.solve(target);
}

double lime_kernel(std::size_t removed, std::size_t n, double kernel_width) {
  const double d = static_cast<double>(removed) / static_cast<double>(n);
  return std::exp(-(d * d) / (kernel_width * kernel_width));
}

double shapley_kernel(std::size_t n, std::size_t s) {
  if (s == 0 || s >= n) throw Error(ErrorKind::parameter, "coalition size must lie in (0, n)");
  double binom = 1.0;
  for (std::size_t i = 1; i <= s; ++i) {
    binom = binom * static_cast<double>(n - s + i) / static_cast<double>(i);
  }
  return static_cast<double>(n - 1) /
         (binom * static_cast<double>(s) * static_cast<double>(n - s));
}

namespace {

double class_probability(const TextClassifier& model, const TokenizedText& text,
                         const std::vector<bool>& keep, MaskMode mode, std::size_t label,
                         QueryLedger& ledger) {
  const auto result = predict(model, text.masked(keep, mode), ledger, Channel::interpreter);
  return result.probabilities(static_cast<Eigen::Index>(label));
}

std::vector<bool> bits_to_mask(std::uint64_t bits, std::size_t n) {
  std::vector<bool> keep(n);
  for (std::size_t i = 0; i < n; ++i) keep[i] = ((bits >> i) & 1U) != 0;
  return keep;
}

void check_label(const TextClassifier& model, std::size_t label) {
  if (label >= model.label_count()) throw Error(ErrorKind::index, "class index out of range");
}

}  // namespace

InterpretationMap lime_explain(const TextClassifier& model, const TokenizedText& text,
                               std::size_t label, const InterpreterConfig& config,
                               QueryLedger& ledger) {
  validate(config);
  check_label(model, label);
  const std::size_t n = text.size();
  if (n == 0) throw Error(ErrorKind::empty_input, "cannot explain an empty token list");
  if (config.sample_count < n + 2) {
    throw Error(ErrorKind::parameter, "sample_count must be at least token count + 2");
  }

  const auto rows = static_cast<Eigen::Index>(config.sample_count);
  Eigen::MatrixXd masks(rows, static_cast<Eigen::Index>(n));
  Eigen::VectorXd values(rows);
  Eigen::VectorXd weights(rows);
  Rng rng(config.seed);
  std::vector<bool> keep(n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    std::size_t removed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      // First sample is the unperturbed input.
      keep[i] = r == 0 ? true : rng.coin();
      masks(r, static_cast<Eigen::Index>(i)) = keep[i] ? 1.0 : 0.0;
      if (!keep[i]) ++removed;
    }
    values(r) = class_probability(model, text, keep, config.mask_mode, label, ledger);
    weights(r) = lime_kernel(removed, n, config.kernel_width);
  }
  const auto beta = fit_weighted_ridge(masks, values, weights, config.ridge_lambda);
  return {text.token_texts(), beta.tail(static_cast<Eigen::Index>(n)), InterpreterKind::lime,
          label};
}

InterpretationMap kshap_explain(const TextClassifier& model, const TokenizedText& text,
                                std::size_t label, const InterpreterConfig& config,
                                QueryLedger& ledger) {
  validate(config);
  check_label(model, label);
  const std::size_t n = text.size();
  if (n == 0) throw Error(ErrorKind::empty_input, "cannot explain an empty token list");

  const double full = class_probability(model, text, std::vector<bool>(n, true),
                                        config.mask_mode, label, ledger);
  const double empty = class_probability(model, text, std::vector<bool>(n, false),
                                         config.mask_mode, label, ledger);
  const double delta = full - empty;
  const auto nn = static_cast<Eigen::Index>(n);
  InterpretationMap map{text.token_texts(), Eigen::VectorXd::Zero(nn), InterpreterKind::kshap,
                        label};
  if (n == 1) {
    map.scores(0) = delta;
    return map;
  }

  // Coalitions as bit masks over tokens, with their regression weights.
  std::vector<std::uint64_t> coalitions;
  std::vector<double> coalition_weights;
  double lambda = 0.0;
  const bool exact = n < 63 && (std::uint64_t{1} << n) <= kKshapExactLimit;
  if (exact) {
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t bits = 1; bits + 1 < count; ++bits) {
      coalitions.push_back(bits);
      coalition_weights.push_back(shapley_kernel(n, static_cast<std::size_t>(__builtin_popcountll(bits))));
    }
  } else {
    if (config.sample_count < n + 2) {
      throw Error(ErrorKind::parameter, "sample_count must be at least token count + 2");
    }
    // Sizes drawn proportionally to the total kernel mass of each size;
    // members uniform within the size. Samples are then equally weighted.
    std::vector<double> size_mass(n, 0.0);
    double total = 0.0;
    for (std::size_t s = 1; s < n; ++s) {
      size_mass[s] = static_cast<double>(n - 1) / (static_cast<double>(s) * static_cast<double>(n - s));
      total += size_mass[s];
    }
    Rng rng(config.seed);
    std::vector<std::size_t> members(n);
    for (std::size_t k = 0; k < config.sample_count; ++k) {
      double u = rng.uniform01() * total;
      std::size_t s = 1;
      while (s + 1 < n && u >= size_mass[s]) {
        u -= size_mass[s];
        ++s;
      }
      std::iota(members.begin(), members.end(), std::size_t{0});
      for (std::size_t i = 0; i < s; ++i) {
        std::swap(members[i], members[i + rng.uniform_index(n - i)]);
      }
      std::uint64_t bits = 0;
      for (std::size_t i = 0; i < s; ++i) bits |= std::uint64_t{1} << members[i];
      coalitions.push_back(bits);
      coalition_weights.push_back(1.0);
    }
    lambda = config.ridge_lambda;
  }

  // Efficiency is imposed by eliminating the last token's value:
  // phi_last = delta - sum(phi_i), giving a regression on n-1 unknowns.
  const auto rows = static_cast<Eigen::Index>(coalitions.size());
  Eigen::MatrixXd design(rows, nn - 1);
  Eigen::VectorXd target(rows);
  Eigen::VectorXd weights(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto bits = coalitions[static_cast<std::size_t>(r)];
    const auto keep = bits_to_mask(bits, n);
    const double value = class_probability(model, text, keep, config.mask_mode, label, ledger);
    const double last = keep[n - 1] ? 1.0 : 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      design(r, static_cast<Eigen::Index>(i)) = (keep[i] ? 1.0 : 0.0) - last;
    }
    target(r) = value - empty - last * delta;
    weights(r) = coalition_weights[static_cast<std::size_t>(r)];
  }
  // No intercept; f(empty) is already subtracted from the targets.
  const Eigen::VectorXd root = weights.array().sqrt();
  Eigen::MatrixXd a = root.asDiagonal() * design;
  Eigen::VectorXd b = root.cwiseProduct(target);
  if (lambda > 0.0) {
    Eigen::MatrixXd stacked(a.rows() + nn - 1, nn - 1);
    stacked << a, std::sqrt(lambda) * Eigen::MatrixXd::Identity(nn - 1, nn - 1);
    Eigen::VectorXd rhs(b.size() + nn - 1);
    rhs << b, Eigen::VectorXd::Zero(nn - 1);
    a = std::move(stacked);
    b = std::move(rhs);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < nn - 1) {
    throw Error(ErrorKind::solver, "coalition design is singular; raise sample_count");
  }
  const Eigen::VectorXd phi = qr.solve(b);
  map.scores.head(nn - 1) = phi;
  map.scores(nn - 1) = delta - phi.sum();
  return map;
}

InterpretationMap saliency_explain(const Model& model, const TokenizedText& text,
                                   std::size_t label) {
  check_label(model, label);
  const auto& params = model.params();
  const Eigen::VectorXd gradient =
      gradient_wrt_features(params, text.source().content(), label);
  InterpretationMap map{text.token_texts(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(text.size())),
                        InterpreterKind::saliency, label};
  for (std::size_t t = 0; t < text.size(); ++t) {
    const auto features = featurize(text[t].text, params.features);
    double score = 0.0;
    for (std::size_t k = 0; k < features.nnz(); ++k) {
      score += std::abs(gradient(static_cast<Eigen::Index>(features.indices[k]))) *
               features.counts[k];
    }
    map.scores(static_cast<Eigen::Index>(t)) = score;
  }
  return map;
}

InterpretationMap brute_force_shapley(const TextClassifier& model, const TokenizedText& text,
                                      std::size_t label, QueryLedger& ledger, MaskMode mode) {
  check_label(model, label);
  const std::size_t n = text.size();
  if (n == 0) throw Error(ErrorKind::empty_input, "cannot explain an empty token list");
  if (n > kBruteForceShapleyMaxTokens) {
    throw Error(ErrorKind::size, "brute-force Shapley supports at most 10 tokens");
  }
  const std::size_t count = std::size_t{1} << n;
  std::vector<double> value(count);
  for (std::size_t bits = 0; bits < count; ++bits) {
    value[bits] = class_probability(model, text, bits_to_mask(bits, n), mode, label, ledger);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> totals(n, 0.0);
  std::size_t permutations = 0;
  do {
    std::size_t coalition = 0;
    for (std::size_t player : order) {
      const std::size_t with = coalition | (std::size_t{1} << player);
      totals[player] += value[with] - value[coalition];
      coalition = with;
    }
    ++permutations;
  } while (std::next_permutation(order.begin(), order.end()));

  InterpretationMap map{text.token_texts(), Eigen::VectorXd(static_cast<Eigen::Index>(n)),
                        InterpreterKind::kshap, label};
  for (std::size_t i = 0; i < n; ++i) {
    map.scores(static_cast<Eigen::Index>(i)) = totals[i] / static_cast<double>(permutations);
  }
  return map;
}

InterpretationMap Interpreter::explain(const TextClassifier& model, const TokenizedText& text,
                                       std::size_t label, QueryLedger& ledger) const {
  switch (kind) {
    case InterpreterKind::lime:
      return lime_explain(model, text, label, config, ledger);
    case InterpreterKind::kshap:
      return kshap_explain(model, text, label, config, ledger);
    case InterpreterKind::saliency: {
      const auto* differentiable = dynamic_cast<const Model*>(&model);
      if (differentiable == nullptr) {
        throw Error(ErrorKind::invalid_input, "saliency needs a differentiable model");
      }
      return saliency_explain(*differentiable, text, label);
    }
  }
  throw Error(ErrorKind::configuration, "unknown interpreter");
}

}  // namespace glyphshift
