#ifndef GLYPHSHIFT_RUN_CONFIG_HPP
#define GLYPHSHIFT_RUN_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glyphshift/defense.hpp"
#include "glyphshift/eval.hpp"
#include "json.hpp"

namespace glyphshift {

// Run configs are single JSON documents carrying "version": 1. Unknown keys
// are errors reported with their dotted path; relative paths resolve against
// the config file's directory and must exist at load.

inline constexpr int kConfigVersion = 1;

/// Either a saved model file or a recipe trained on the config's train set.
struct ClassifierSpec {
  std::string id;
  std::optional<std::filesystem::path> model_path;
  ModelKind kind = ModelKind::linear;
  TrainConfig train;
  FeatureConfig features;
};

struct ExperimentSettings {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> train_dataset;
  std::vector<ClassifierSpec> classifiers;
  std::vector<InterpreterKind> interpreters;
  std::vector<AttackKind> attacks;
  std::size_t sample_cap = 200;
  AttackConfig attack;
  InterpreterConfig interpreter;
  double iou_top_k_fraction = 0.2;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::size_t heatmaps = 0;  // per cell, first successes
};

struct DefendSettings {
  std::vector<std::filesystem::path> datasets;  // concatenated
  DefenseExperiment experiment;
  DefenseConfig defense;
};

ExperimentSettings parse_experiment_settings(const nlohmann::json& document,
                                             const std::filesystem::path& base_dir);
DefendSettings parse_defend_settings(const nlohmann::json& document,
                                     const std::filesystem::path& base_dir);

/// Reads and parses the file; malformed JSON is a configuration error.
nlohmann::json read_config(const std::filesystem::path& path);

/// Loads or trains every classifier in `settings`.
std::vector<ClassifierEntry> build_classifiers(const ExperimentSettings& settings);

ExperimentConfig to_experiment_config(const ExperimentSettings& settings,
                                      std::vector<ClassifierEntry> classifiers);

Dataset concat_datasets(const std::vector<std::filesystem::path>& paths);

}  // namespace glyphshift

#endif  // GLYPHSHIFT_RUN_CONFIG_HPP
