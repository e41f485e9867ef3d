#include "glyphshift/defense.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "glyphshift/error.hpp"
#include "glyphshift/rng.hpp"
#include "glyphshift/utf8.hpp"

namespace glyphshift {

void validate(const DefenseConfig& config) {
  if (!(config.augmentation_rate >= 0.0 && config.augmentation_rate <= 1.0)) {
    throw Error(ErrorKind::parameter, "augmentation rate must lie in [0, 1]");
  }
  if (config.chars_per_record < 1) {
    throw Error(ErrorKind::parameter, "chars_per_record must be >= 1");
  }
}

Dataset augment_adversarial(const Dataset& dataset, const DefenseConfig& config) {
  validate(dataset);
  validate(config);
  Dataset out = dataset;
  const auto n = dataset.size();
  const auto count = static_cast<std::size_t>(
      std::ceil(config.augmentation_rate * static_cast<double>(n)));
  if (count == 0) return out;

  Rng rng(config.seed);
  std::vector<std::size_t> chosen(n);
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  rng.shuffle(chosen);
  chosen.resize(count);
  std::sort(chosen.begin(), chosen.end());

  for (std::size_t index : chosen) {
    const auto& record = dataset.records[index];
    auto cps = record.text.code_points();
    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < cps.size(); ++i) {
      if (config.table.contains(cps[i])) sites.push_back(i);
    }
    rng.shuffle(sites);
    sites.resize(std::min(sites.size(), config.chars_per_record));
    for (std::size_t site : sites) {
      const auto& replacements = config.table.replacements(cps[site]);
      cps[site] = replacements[rng.uniform_index(replacements.size())];
    }
    out.records.push_back({RawText(utf8::encode(cps)), record.label});
  }
  return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset, std::uint64_t seed,
                                             double train_fraction) {
  validate(dataset);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto cut = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(dataset.size())));
  Dataset train{{}, dataset.label_count, dataset.class_names};
  Dataset test{{}, dataset.label_count, dataset.class_names};
  std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<std::size_t> test_rows(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  for (auto i : train_rows) train.records.push_back(dataset.records[i]);
  for (auto i : test_rows) test.records.push_back(dataset.records[i]);
  return {std::move(train), std::move(test)};
}

DefenseRecord evaluate_defense(const Dataset& dataset, const DefenseExperiment& experiment,
                               const DefenseConfig& defense) {
  validate(defense);
  auto [train_set, test_set] = split_train_test(dataset, experiment.master_seed);
  if (test_set.records.empty()) throw Error(ErrorKind::data, "test split is empty");
  const auto augmented = augment_adversarial(train_set, defense);

  auto before = std::make_shared<Model>(
      train(train_set, experiment.classifier, defense.train, defense.features));
  auto after = std::make_shared<Model>(
      train(augmented, experiment.classifier, defense.train, defense.features));

  ExperimentConfig config;
  config.interpreters = {experiment.interpreter};
  config.attacks = {experiment.attack};
  config.sample_cap = experiment.sample_cap;
  config.attack = experiment.attack_config;
  config.interpreter = experiment.interpreter_config;
  config.iou_top_k_fraction = experiment.iou_top_k_fraction;
  config.master_seed = experiment.master_seed;
  config.jobs = experiment.jobs;

  DefenseRecord record;
  record.train_size = train_set.size();
  record.augmented_train_size = augmented.size();
  record.test_size = test_set.size();
  record.acc_before = accuracy(*before, test_set);
  record.acc_after = accuracy(*after, test_set);

  config.classifiers = {{to_string(experiment.classifier), before}};
  record.report_before = evaluate_attack(config, test_set);
  config.classifiers = {{to_string(experiment.classifier), after}};
  record.report_after = evaluate_attack(config, test_set);
  record.asr_before = record.report_before.cells.begin()->second.asr;
  record.asr_after = record.report_after.cells.begin()->second.asr;
  return record;
}

}  // namespace glyphshift
