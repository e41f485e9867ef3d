#ifndef GLYPHSHIFT_INTERPRET_HPP
#define GLYPHSHIFT_INTERPRET_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "glyphshift/models.hpp"
#include "glyphshift/textcore.hpp"

namespace glyphshift {

enum class InterpreterKind { lime, kshap, saliency };

const char* to_string(InterpreterKind kind);
InterpreterKind parse_interpreter_kind(std::string_view name);

/// Raw per-token importance for one prediction.
struct InterpretationMap {
  std::vector<std::string> tokens;
  Eigen::VectorXd scores;
  InterpreterKind interpreter = InterpreterKind::lime;
  std::size_t target_class = 0;

  std::size_t size() const { return tokens.size(); }
};

/// Min-max normalized map; only produced by normalize_scores.
struct NormalizedMap {
  std::vector<std::string> tokens;
  Eigen::VectorXd scores;
  InterpreterKind interpreter = InterpreterKind::lime;
  std::size_t target_class = 0;

  std::size_t size() const { return tokens.size(); }
};

NormalizedMap normalize_scores(const InterpretationMap& map);

/// Token indices by normalized score, descending; ties by ascending index.
std::vector<std::size_t> rank_tokens(const NormalizedMap& map);

struct InterpreterConfig {
  std::size_t sample_count = 1000;
  double kernel_width = 0.75;
  double ridge_lambda = 1e-3;
  std::uint64_t seed = 0;
  MaskMode mask_mode = MaskMode::drop;
};

void validate(const InterpreterConfig& config);

/// Weighted ridge fit of values ~ intercept + masks * coef. Row i of
/// `masks` is one sample; the intercept is not penalised. Returns
/// [intercept, coef...]. Throws solver when singular with lambda == 0.
Eigen::VectorXd fit_weighted_ridge(const Eigen::MatrixXd& masks, const Eigen::VectorXd& values,
                                   const Eigen::VectorXd& weights, double lambda);

/// LIME proximity weight for a mask with `removed` of `n` tokens dropped.
double lime_kernel(std::size_t removed, std::size_t n, double kernel_width);

/// Shapley kernel weight (n-1) / (C(n,s) s (n-s)) for 0 < s < n.
double shapley_kernel(std::size_t n, std::size_t coalition_size);

InterpretationMap lime_explain(const TextClassifier& model, const TokenizedText& text,
                               std::size_t label, const InterpreterConfig& config,
                               QueryLedger& ledger);

/// Full coalition enumeration when 2^n <= kKshapExactLimit, else sampled.
InterpretationMap kshap_explain(const TextClassifier& model, const TokenizedText& text,
                                std::size_t label, const InterpreterConfig& config,
                                QueryLedger& ledger);

constexpr std::size_t kKshapExactLimit = 4096;

/// White-box: per token, sum over its own n-grams of |gradient| x count.
InterpretationMap saliency_explain(const Model& model, const TokenizedText& text,
                                   std::size_t label);

constexpr std::size_t kBruteForceShapleyMaxTokens = 10;

/// Exact Shapley values by averaging marginal contributions over all n!
/// orderings of the 2^n coalition table. n <= 10.
InterpretationMap brute_force_shapley(const TextClassifier& model, const TokenizedText& text,
                                      std::size_t label, QueryLedger& ledger,
                                      MaskMode mode = MaskMode::drop);

/// An interpreter family plus its configuration.
struct Interpreter {
  InterpreterKind kind = InterpreterKind::saliency;
  InterpreterConfig config;

  /// Saliency requires `model` to be a glyphshift::Model.
  InterpretationMap explain(const TextClassifier& model, const TokenizedText& text,
                            std::size_t label, QueryLedger& ledger) const;
};

}  // namespace glyphshift

#endif  // GLYPHSHIFT_INTERPRET_HPP
