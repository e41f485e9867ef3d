#ifndef GLYPHSHIFT_ATTACK_HPP
#define GLYPHSHIFT_ATTACK_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glyphshift/interpret.hpp"
#include "glyphshift/models.hpp"
#include "glyphshift/textcore.hpp"

namespace glyphshift {

enum class AttackKind { advchar, textbugger, random };

const char* to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);

struct AttackConfig {
  double similarity_threshold = 0.3;
  std::size_t char_budget = 8;
  SubstitutionPolicy policy;
  std::size_t resim_every = 1;
  std::uint64_t seed = 0;
  HomoglyphTable table = default_homoglyph_table();
};

void validate(const AttackConfig& config);

/// Normalized rank displacement S between two maps of equal length.
double similarity(const NormalizedMap& benign, const NormalizedMap& adversarial);

enum class EditOp { substitute, swap, remove, insert_space };

const char* to_string(EditOp op);

struct TraceStep {
  std::size_t token_index = 0;
  std::size_t position = 0;  // code-point index inside the token before the edit
  EditOp op = EditOp::substitute;
  char32_t old_char = 0;  // 0 for insertions
  char32_t new_char = 0;  // 0 for deletions
  std::string token_after;
  std::size_t label_after = 0;
  Eigen::VectorXd probabilities_after;
  std::size_t attack_queries = 0;  // attack-channel calls spent on this step
  std::optional<double> similarity;
};

enum class StopReason {
  label_flipped,
  similarity_exceeded,
  budget_exhausted,
  tokens_exhausted,
};

const char* to_string(StopReason reason);

struct AttackOutcome {
  AttackKind attack = AttackKind::advchar;
  std::optional<InterpreterKind> interpreter;
  std::uint64_t interpreter_seed = 0;

  bool success = false;
  StopReason stop_reason = StopReason::tokens_exhausted;
  std::string benign_text;
  std::size_t benign_label = 0;
  std::size_t token_count = 0;
  std::optional<std::string> adversarial_text;  // present iff success
  std::string final_text;                       // last x' examined
  std::vector<std::string> final_tokens;        // per benign token

  std::size_t final_label = 0;
  double misclassification_confidence = 0.0;  // P(final_label) x 100
  std::size_t attack_queries = 0;
  std::size_t interpreter_queries = 0;
  std::size_t setup_queries = 0;  // attack-channel calls before the first step
  std::size_t perturbed_chars = 0;
  std::optional<double> final_similarity;
  std::optional<NormalizedMap> benign_map;
  std::optional<NormalizedMap> adversarial_map;  // aligned to benign tokens
  std::vector<TraceStep> trace;
};

/// Explains `perturbed` (one replacement string per benign token) and folds
/// the scores back onto the benign tokens. Tokens split by an edit have
/// their piece scores summed.
InterpretationMap explain_aligned(const Interpreter& interpreter, const TextClassifier& model,
                                  const TokenizedText& benign,
                                  const std::vector<std::string>& perturbed, std::size_t label,
                                  QueryLedger& ledger);

/// Interpretation-guided greedy homoglyph attack.
AttackOutcome advchar_attack(const TextClassifier& model, const Interpreter& interpreter,
                             const RawText& text, std::size_t benign_label,
                             const AttackConfig& config);

/// Leave-one-out ranked, best-of-four character edits. `measure`, when
/// given, is used only after the attack to report similarity.
AttackOutcome baseline_bug_attack(const TextClassifier& model, const RawText& text,
                                  std::size_t benign_label, const AttackConfig& config,
                                  const Interpreter* measure = nullptr);

/// Seeded-uniform homoglyph substitutions.
AttackOutcome random_attack(const TextClassifier& model, const RawText& text,
                            std::size_t benign_label, const AttackConfig& config,
                            const Interpreter* measure = nullptr);

AttackOutcome run_attack(AttackKind kind, const TextClassifier& model,
                         const Interpreter& interpreter, const RawText& text,
                         std::size_t benign_label, const AttackConfig& config);

}  // namespace glyphshift

#endif  // GLYPHSHIFT_ATTACK_HPP
