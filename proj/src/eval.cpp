#include "glyphshift/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "glyphshift/error.hpp"
#include "glyphshift/metrics.hpp"
#include "glyphshift/rng.hpp"

namespace glyphshift {

double iou_topk(const NormalizedMap& benign, const NormalizedMap& adversarial, std::size_t k) {
  if (benign.size() != adversarial.size()) {
    throw Error(ErrorKind::alignment, "interpretation maps differ in token count");
  }
  return topk_jaccard(benign.scores, adversarial.scores, k);
}

std::size_t iou_k(std::size_t token_count, double fraction) {
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(token_count)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(token_count, 1));
}

void validate(const ExperimentConfig& config) {
  if (config.classifiers.empty()) throw Error(ErrorKind::configuration, "no classifiers");
  if (config.interpreters.empty()) throw Error(ErrorKind::configuration, "no interpreters");
  if (config.attacks.empty()) throw Error(ErrorKind::configuration, "no attacks");
  if (config.sample_cap < 1) throw Error(ErrorKind::configuration, "sample_cap must be >= 1");
  if (!(config.iou_top_k_fraction > 0.0 && config.iou_top_k_fraction <= 1.0)) {
    throw Error(ErrorKind::configuration, "iou_top_k_fraction must lie in (0, 1]");
  }
  for (const auto& c : config.classifiers) {
    if (!c.model) throw Error(ErrorKind::configuration, "classifier '" + c.id + "' is missing");
  }
  validate(config.attack);
  validate(config.interpreter);
}

std::uint64_t input_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, index);
}

namespace {

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results must be
// written by index; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::size_t> correctly_classified(const TextClassifier& model, const Dataset& dataset,
                                              std::size_t cap) {
  std::vector<std::size_t> rows;
  const auto limit = std::min(cap, dataset.size());
  for (std::size_t i = 0; i < limit; ++i) {
    const auto& r = dataset.records[i];
    if (argmax(model.probabilities(r.text.content())) == r.label) rows.push_back(i);
  }
  return rows;
}

Interpreter seeded_interpreter(InterpreterKind kind, const InterpreterConfig& base,
                               std::uint64_t seed) {
  Interpreter interpreter{kind, base};
  interpreter.config.seed = seed;
  return interpreter;
}

AttackConfig seeded_attack(const AttackConfig& base, std::uint64_t seed) {
  AttackConfig config = base;
  config.seed = seed;
  config.policy.seed = seed;
  return config;
}

}  // namespace

void aggregate(CellReport& cell, double iou_fraction) {
  cell.n_attempted = cell.outcomes.size();
  cell.n_succeeded = 0;
  cell.ious.assign(cell.outcomes.size(), std::nullopt);
  std::vector<double> attack_q, interp_q, mc, pa, iou;
  for (std::size_t i = 0; i < cell.outcomes.size(); ++i) {
    const auto& o = cell.outcomes[i];
    attack_q.push_back(static_cast<double>(o.attack_queries));
    interp_q.push_back(static_cast<double>(o.interpreter_queries));
    if (!o.success) continue;
    ++cell.n_succeeded;
    mc.push_back(o.misclassification_confidence);
    pa.push_back(static_cast<double>(o.perturbed_chars));
    if (o.benign_map && o.adversarial_map) {
      const double value =
          iou_topk(*o.benign_map, *o.adversarial_map, iou_k(o.token_count, iou_fraction));
      cell.ious[i] = value;
      iou.push_back(value);
    }
  }
  cell.asr = cell.n_attempted == 0
                 ? 0.0
                 : static_cast<double>(cell.n_succeeded) / static_cast<double>(cell.n_attempted);
  cell.mean_attack_queries = mean(attack_q);
  cell.median_attack_queries = median(attack_q);
  cell.mean_interpreter_queries = mean(interp_q);
  cell.median_interpreter_queries = median(interp_q);
  cell.mean_mc = mc.empty() ? std::nullopt : std::optional<double>(mean(mc));
  cell.mean_pa = pa.empty() ? std::nullopt : std::optional<double>(mean(pa));
  cell.mean_iou = iou.empty() ? std::nullopt : std::optional<double>(mean(iou));
}

ExperimentReport evaluate_attack(const ExperimentConfig& config) {
  return evaluate_attack(config, load_dataset(config.dataset_path));
}

ExperimentReport evaluate_attack(const ExperimentConfig& config, const Dataset& dataset) {
  validate(config);
  ExperimentReport report;
  report.iou_top_k_fraction = config.iou_top_k_fraction;
  report.master_seed = config.master_seed;
  report.sample_cap = config.sample_cap;
  report.attack = config.attack;
  report.interpreter = config.interpreter;

  for (const auto& classifier : config.classifiers) {
    if (classifier.model->label_count() != dataset.label_count) {
      throw Error(ErrorKind::configuration,
                  "classifier '" + classifier.id + "' label count differs from dataset");
    }
    const auto rows = correctly_classified(*classifier.model, dataset, config.sample_cap);
    if (rows.empty()) {
      throw Error(ErrorKind::empty_report,
                  "classifier '" + classifier.id + "' classifies no input correctly");
    }
    for (auto interpreter_kind : config.interpreters) {
      for (auto attack_kind : config.attacks) {
        CellReport cell;
        cell.input_indices = rows;
        cell.outcomes.resize(rows.size());
        parallel_for(rows.size(), config.jobs, [&](std::size_t i) {
          const auto row = rows[i];
          const auto seed = input_seed(config.master_seed, row);
          const auto interpreter = seeded_interpreter(interpreter_kind, config.interpreter, seed);
          const auto attack = seeded_attack(config.attack, seed);
          const auto& record = dataset.records[row];
          cell.outcomes[i] = run_attack(attack_kind, *classifier.model, interpreter, record.text,
                                        record.label, attack);
        });
        aggregate(cell, config.iou_top_k_fraction);
        report.cells.emplace(CellKey{classifier.id, to_string(interpreter_kind),
                                     to_string(attack_kind)},
                             std::move(cell));
      }
    }
  }
  return report;
}

InterpreterTransfer transfer_interpreters(const std::vector<AttackOutcome>& outcomes,
                                          const Interpreter& target,
                                          const TextClassifier& model, double iou_fraction) {
  if (outcomes.empty()) throw Error(ErrorKind::invalid_input, "adversarial set is empty");
  InterpreterTransfer result;
  for (const auto& o : outcomes) {
    if (!o.success) continue;
    const auto tokens = tokenize(RawText(o.benign_text));
    Interpreter seeded = target;
    seeded.config.seed = o.interpreter_seed;
    QueryLedger ledger;
    const auto benign = normalize_scores(seeded.explain(model, tokens, o.benign_label, ledger));
    const auto adversarial = normalize_scores(
        explain_aligned(seeded, model, tokens, o.final_tokens, o.benign_label, ledger));
    result.ious.push_back(iou_topk(benign, adversarial, iou_k(tokens.size(), iou_fraction)));
  }
  result.n_inputs = result.ious.size();
  if (!result.ious.empty()) result.mean_iou = mean(result.ious);
  return result;
}

ClassifierTransfer transfer_classifiers(const std::vector<AttackOutcome>& outcomes,
                                        std::size_t source_label_count,
                                        const TextClassifier& target) {
  if (target.label_count() != source_label_count) {
    throw Error(ErrorKind::configuration, "target classifier label space differs from source");
  }
  ClassifierTransfer result;
  std::vector<double> mc;
  for (const auto& o : outcomes) {
    if (!o.success || !o.adversarial_text) continue;
    ++result.n_source_successes;
    const auto p = target.probabilities(*o.adversarial_text);
    const auto label = argmax(p);
    if (label != o.benign_label) {
      ++result.n_transferred;
      mc.push_back(100.0 * p(static_cast<Eigen::Index>(label)));
    }
  }
  if (result.n_source_successes > 0) {
    result.asr = static_cast<double>(result.n_transferred) /
                 static_cast<double>(result.n_source_successes);
  }
  if (!mc.empty()) result.mean_mc = mean(mc);
  return result;
}

TransferReport evaluate_transfer(const ExperimentConfig& config, const Dataset& dataset) {
  ExperimentConfig source = config;
  source.attacks = {AttackKind::advchar};
  const auto report = evaluate_attack(source, dataset);

  TransferReport transfer;
  transfer.iou_top_k_fraction = config.iou_top_k_fraction;
  transfer.master_seed = config.master_seed;
  for (const auto& [key, cell] : report.cells) {
    const auto& source_classifier = *std::find_if(
        config.classifiers.begin(), config.classifiers.end(),
        [&](const ClassifierEntry& c) { return c.id == key.classifier; });
    std::vector<AttackOutcome> successes;
    for (const auto& o : cell.outcomes) {
      if (o.success) successes.push_back(o);
    }
    for (auto target_kind : config.interpreters) {
      InterpreterTransfer entry;
      if (!successes.empty()) {
        entry = transfer_interpreters(successes, Interpreter{target_kind, config.interpreter},
                                      *source_classifier.model, config.iou_top_k_fraction);
      }
      transfer.interpreter_transfer.emplace(
          CellKey{key.interpreter, to_string(target_kind), key.classifier}, std::move(entry));
    }
    for (const auto& target : config.classifiers) {
      if (target.id == key.classifier) continue;
      transfer.classifier_transfer.emplace(
          CellKey{key.interpreter, key.classifier, target.id},
          transfer_classifiers(successes, source_classifier.model->label_count(), *target.model));
    }
  }
  return transfer;
}

CorrelationTable correlation_analysis(const std::vector<AttackOutcome>& outcomes) {
  if (outcomes.size() < 3) {
    throw Error(ErrorKind::parameter, "correlation analysis needs at least 3 outcomes");
  }
  CorrelationTable table;
  const auto n = static_cast<Eigen::Index>(outcomes.size());
  Eigen::MatrixXd columns(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = outcomes[static_cast<std::size_t>(i)];
    CorrelationRow row;
    row.tl = static_cast<double>(o.token_count);
    row.mc = o.misclassification_confidence;
    row.qc_attack = static_cast<double>(o.attack_queries);
    row.qc_interp = static_cast<double>(o.interpreter_queries);
    row.pa = static_cast<double>(o.perturbed_chars);
    row.success = o.success;
    table.rows.push_back(row);
    columns.row(i) << row.tl, row.mc, row.qc_attack, row.pa;
  }
  const char* names[] = {"tl", "mc", "qc", "pa"};
  for (Eigen::Index a = 0; a < 4; ++a) {
    for (Eigen::Index b = a; b < 4; ++b) {
      table.entries.push_back({names[a], names[b], pearson(columns.col(a), columns.col(b)),
                               spearman(columns.col(a), columns.col(b))});
    }
  }
  return table;
}

}  // namespace glyphshift
