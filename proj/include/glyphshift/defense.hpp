#ifndef GLYPHSHIFT_DEFENSE_HPP
#define GLYPHSHIFT_DEFENSE_HPP

#include <cstddef>
#include <cstdint>
#include <utility>

#include "glyphshift/attack.hpp"
#include "glyphshift/eval.hpp"
#include "glyphshift/models.hpp"
#include "glyphshift/textcore.hpp"

namespace glyphshift {

struct DefenseConfig {
  double augmentation_rate = 0.5;
  std::size_t chars_per_record = 2;
  HomoglyphTable table = default_homoglyph_table();
  std::uint64_t seed = 0;
  TrainConfig train;
  FeatureConfig features;
};

void validate(const DefenseConfig& config);

/// Appends ceil(rate * N) homoglyph-perturbed copies of seeded-chosen
/// records (originals kept, labels unchanged). Each copy differs from its
/// source in exactly chars_per_record code points, or in every
/// substitutable one when the text has fewer.
Dataset augment_adversarial(const Dataset& dataset, const DefenseConfig& config);

/// Seeded 70/30 split: first is train, second is test.
std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset, std::uint64_t seed,
                                             double train_fraction = 0.7);

struct DefenseRecord {
  double acc_before = 0.0;
  double acc_after = 0.0;
  double asr_before = 0.0;
  double asr_after = 0.0;
  std::size_t train_size = 0;
  std::size_t augmented_train_size = 0;
  std::size_t test_size = 0;
  ExperimentReport report_before;
  ExperimentReport report_after;
};

struct DefenseExperiment {
  ModelKind classifier = ModelKind::linear;
  InterpreterKind interpreter = InterpreterKind::saliency;
  AttackKind attack = AttackKind::advchar;
  AttackConfig attack_config;
  InterpreterConfig interpreter_config;
  std::size_t sample_cap = 1000;
  double iou_top_k_fraction = 0.2;
  std::uint64_t master_seed = 0;
  std::size_t jobs = 1;
};

DefenseRecord evaluate_defense(const Dataset& dataset, const DefenseExperiment& experiment,
                               const DefenseConfig& defense);

}  // namespace glyphshift

#endif  // GLYPHSHIFT_DEFENSE_HPP
