#ifndef GLYPHSHIFT_EVAL_HPP
#define GLYPHSHIFT_EVAL_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "glyphshift/attack.hpp"
#include "glyphshift/interpret.hpp"
#include "glyphshift/models.hpp"
#include "glyphshift/textcore.hpp"

namespace glyphshift {

/// |top-k(benign) ∩ top-k(adversarial)| / |union|.
double iou_topk(const NormalizedMap& benign, const NormalizedMap& adversarial, std::size_t k);

/// max(1, ceil(fraction * n)).
std::size_t iou_k(std::size_t token_count, double fraction);

struct ClassifierEntry {
  std::string id;
  std::shared_ptr<const TextClassifier> model;
};

struct ExperimentConfig {
  std::vector<ClassifierEntry> classifiers;
  std::vector<InterpreterKind> interpreters;
  std::vector<AttackKind> attacks;
  std::filesystem::path dataset_path;
  std::size_t sample_cap = 200;
  AttackConfig attack;
  InterpreterConfig interpreter;
  double iou_top_k_fraction = 0.2;
  std::uint64_t master_seed = 0;
  std::size_t jobs = 1;
};

void validate(const ExperimentConfig& config);

struct CellKey {
  std::string classifier;
  std::string interpreter;
  std::string attack;

  auto operator<=>(const CellKey&) const = default;
};

struct CellReport {
  std::size_t n_attempted = 0;
  std::size_t n_succeeded = 0;
  double asr = 0.0;
  double mean_attack_queries = 0.0;
  double median_attack_queries = 0.0;
  double mean_interpreter_queries = 0.0;
  double median_interpreter_queries = 0.0;
  std::optional<double> mean_mc;   // over successes
  std::optional<double> mean_pa;   // over successes
  std::optional<double> mean_iou;  // over successes
  std::vector<std::size_t> input_indices;  // dataset row of each outcome
  std::vector<AttackOutcome> outcomes;
  std::vector<std::optional<double>> ious;  // per outcome; successes only
};

struct ExperimentReport {
  std::map<CellKey, CellReport> cells;
  double iou_top_k_fraction = 0.2;
  std::uint64_t master_seed = 0;
  std::size_t sample_cap = 0;
  AttackConfig attack;
  InterpreterConfig interpreter;
};

/// Seeds for input `index`: attack, policy and interpreter all use it.
std::uint64_t input_seed(std::uint64_t master_seed, std::size_t index);

/// Fills the success-conditioned and query aggregates from `outcomes`.
void aggregate(CellReport& cell, double iou_fraction);

ExperimentReport evaluate_attack(const ExperimentConfig& config);
ExperimentReport evaluate_attack(const ExperimentConfig& config, const Dataset& dataset);

struct InterpreterTransfer {
  std::size_t n_inputs = 0;
  std::optional<double> mean_iou;
  std::vector<double> ious;
};

/// Re-explains each successful outcome under `target` (seeded with the
/// outcome's interpreter seed) and measures top-k IoU.
InterpreterTransfer transfer_interpreters(const std::vector<AttackOutcome>& outcomes,
                                          const Interpreter& target,
                                          const TextClassifier& model, double iou_fraction);

struct ClassifierTransfer {
  std::size_t n_source_successes = 0;
  std::size_t n_transferred = 0;
  std::optional<double> asr;
  std::optional<double> mean_mc;
};

ClassifierTransfer transfer_classifiers(const std::vector<AttackOutcome>& outcomes,
                                        std::size_t source_label_count,
                                        const TextClassifier& target);

struct TransferReport {
  // (source interpreter, target interpreter, classifier)
  std::map<CellKey, InterpreterTransfer> interpreter_transfer;
  // (interpreter, source classifier, target classifier); no diagonal
  std::map<CellKey, ClassifierTransfer> classifier_transfer;
  double iou_top_k_fraction = 0.2;
  std::uint64_t master_seed = 0;
};

/// AdvChar on every (classifier, interpreter), then both transfer matrices.
TransferReport evaluate_transfer(const ExperimentConfig& config, const Dataset& dataset);

struct CorrelationRow {
  double tl = 0.0;
  double mc = 0.0;
  double qc_attack = 0.0;
  double qc_interp = 0.0;
  double pa = 0.0;
  bool success = false;
};

struct CorrelationEntry {
  std::string first;
  std::string second;
  std::optional<double> pearson;
  std::optional<double> spearman;
};

struct CorrelationTable {
  std::vector<CorrelationRow> rows;
  std::vector<CorrelationEntry> entries;  // every pair among TL, MC, QC, PA incl. self
};

CorrelationTable correlation_analysis(const std::vector<AttackOutcome>& outcomes);

}  // namespace glyphshift

#endif  // GLYPHSHIFT_EVAL_HPP
