#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "glyphshift/attack.hpp"
#include "glyphshift/defense.hpp"
#include "glyphshift/error.hpp"
#include "glyphshift/eval.hpp"
#include "glyphshift/export.hpp"
#include "glyphshift/run_config.hpp"

namespace fs = std::filesystem;
using namespace glyphshift;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  fs::path out = ".";
};

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::data, "cannot write " + path.string());
  f << contents;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration:
    case ErrorKind::parameter:
      return 1;
    case ErrorKind::empty_input:
    case ErrorKind::data:
    case ErrorKind::model_format:
    case ErrorKind::invalid_input:
    case ErrorKind::training:
    case ErrorKind::no_substitution:
    case ErrorKind::empty_report:
      return 2;
    default:
      return 3;
  }
}

std::string cell_name(const CellKey& key) {
  return key.classifier + "_" + key.interpreter + "_" + key.attack;
}

// --- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string kind = "linear";
  TrainConfig train;
  FeatureConfig features;
  std::string output = "model.gsm";
};

int cmd_train(const TrainArgs& a, const Globals& g) {
  auto config = a.train;
  if (g.seed) config.seed = *g.seed;
  const auto dataset = load_dataset(a.data);
  const auto params = train(dataset, parse_model_kind(a.kind), config, a.features);
  fs::path path = a.output;
  if (path.is_relative()) path = g.out / path;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_model(params, path);
  const Model model(params);
  std::cout << "accuracy on training set: " << accuracy(model, dataset) << "\n"
            << "wrote " << path.string() << "\n";
  return 0;
}

// --- explain / attack -----------------------------------------------------

struct ExplainArgs {
  std::string model;
  std::string text;
  std::string interpreter;
  std::optional<std::size_t> label;
  InterpreterConfig config;
  std::string heatmap;
};

int cmd_explain(const ExplainArgs& a, const Globals& g) {
  const Model model(load_model(a.model));
  Interpreter interpreter{parse_interpreter_kind(a.interpreter), a.config};
  if (g.seed) interpreter.config.seed = *g.seed;
  const RawText text(a.text);
  QueryLedger ledger;
  const auto label = a.label ? *a.label : predict(model, text.content(), ledger, Channel::interpreter).label;
  if (label >= model.label_count()) throw Error(ErrorKind::parameter, "label out of range");
  const auto map = interpreter.explain(model, tokenize(text), label, ledger);
  std::cout << dump(explanation_to_json(map, interpreter.config.seed));
  if (!a.heatmap.empty()) {
    write_file(g.out / a.heatmap, heatmap_html(normalize_scores(map), "explanation"));
  }
  return 0;
}

struct AttackArgs {
  std::string model;
  std::string interpreter = "kshap";
  std::string attack = "advchar";
  std::string text;
  std::optional<std::size_t> label;
  std::string data;
  AttackConfig config;
  std::string policy = "middle-char";
  InterpreterConfig interp;
  std::string heatmap;
};

int cmd_attack(AttackArgs a, const Globals& g) {
  const Model model(load_model(a.model));
  a.config.policy.strategy = parse_substitution_strategy(a.policy);
  const auto seed = g.seed.value_or(0);
  Interpreter interpreter{parse_interpreter_kind(a.interpreter), a.interp};
  const auto kind = parse_attack_kind(a.attack);

  if (!a.data.empty()) {
    const auto dataset = load_dataset(a.data);
    nlohmann::json traces = nlohmann::json::array();
    QueryLedger ledger;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto& record = dataset.records[i];
      if (predict(model, record.text.content(), ledger, Channel::attack).label != record.label) continue;
      auto config = a.config;
      config.seed = input_seed(seed, i);
      config.policy.seed = config.seed;
      interpreter.config.seed = config.seed;
      auto trace = trace_to_json(run_attack(kind, model, interpreter, record.text, record.label, config));
      trace["input_index"] = i;
      traces.push_back(std::move(trace));
    }
    write_file(g.out / "traces.json", dump(traces));
    std::cout << "wrote " << (g.out / "traces.json").string() << "\n";
    return 0;
  }

  if (a.text.empty()) throw Error(ErrorKind::configuration, "give --text or --data");
  const RawText text(a.text);
  QueryLedger ledger;
  const auto label = a.label ? *a.label : predict(model, text.content(), ledger, Channel::attack).label;
  a.config.seed = seed;
  a.config.policy.seed = seed;
  interpreter.config.seed = seed;
  const auto outcome = run_attack(kind, model, interpreter, text, label, a.config);
  std::cout << dump(trace_to_json(outcome));
  if (!a.heatmap.empty() && outcome.benign_map && outcome.adversarial_map) {
    write_file(g.out / a.heatmap,
               heatmap_pair_html(*outcome.benign_map, *outcome.adversarial_map, "attack"));
  }
  return 0;
}

// --- config-driven commands ----------------------------------------------

ExperimentSettings experiment_settings(const std::string& path, const Globals& g) {
  auto settings = parse_experiment_settings(read_config(path), fs::path(path).parent_path());
  if (g.seed) settings.seed = *g.seed;
  if (g.jobs) settings.jobs = *g.jobs;
  return settings;
}

int cmd_evaluate(const std::string& config_path, const Globals& g) {
  const auto settings = experiment_settings(config_path, g);
  const auto config = to_experiment_config(settings, build_classifiers(settings));
  const auto report = evaluate_attack(config);

  write_file(g.out / "report.json", dump(report_to_json(report)));
  write_file(g.out / "report.csv", report_to_csv(report));
  nlohmann::json correlations = nlohmann::json::array();
  for (const auto& [key, cell] : report.cells) {
    const auto name = cell_name(key);
    write_file(g.out / "per_input" / (name + ".csv"), per_input_csv(cell.outcomes));
    nlohmann::json traces = nlohmann::json::array();
    for (std::size_t i = 0; i < cell.outcomes.size(); ++i) {
      auto t = trace_to_json(cell.outcomes[i]);
      t["input_index"] = cell.input_indices[i];
      traces.push_back(std::move(t));
    }
    write_file(g.out / "traces" / (name + ".json"), dump(traces));

    if (cell.outcomes.size() >= 3) {
      auto c = correlation_to_json(correlation_analysis(cell.outcomes));
      c["classifier"] = key.classifier;
      c["interpreter"] = key.interpreter;
      c["attack"] = key.attack;
      correlations.push_back(std::move(c));
    }

    std::size_t written = 0;
    for (std::size_t i = 0; i < cell.outcomes.size() && written < settings.heatmaps; ++i) {
      const auto& o = cell.outcomes[i];
      if (!o.success || !o.benign_map || !o.adversarial_map) continue;
      const auto file = name + "_" + std::to_string(cell.input_indices[i]) + ".html";
      write_file(g.out / "heatmaps" / file,
                 heatmap_pair_html(*o.benign_map, *o.adversarial_map, name));
      ++written;
    }
  }
  write_file(g.out / "correlation.json", dump(correlations));
  std::cout << report_to_csv(report);
  return 0;
}

int cmd_transfer(const std::string& config_path, const Globals& g) {
  const auto settings = experiment_settings(config_path, g);
  const auto config = to_experiment_config(settings, build_classifiers(settings));
  const auto report = evaluate_transfer(config, load_dataset(settings.dataset));
  write_file(g.out / "transfer.json", dump(transfer_to_json(report)));
  std::cout << "wrote " << (g.out / "transfer.json").string() << "\n";
  return 0;
}

int cmd_defend(const std::string& config_path, const Globals& g) {
  auto settings = parse_defend_settings(read_config(config_path), fs::path(config_path).parent_path());
  if (g.seed) settings.experiment.master_seed = *g.seed;
  if (g.jobs) settings.experiment.jobs = *g.jobs;
  const auto dataset = concat_datasets(settings.datasets);
  const auto record = evaluate_defense(dataset, settings.experiment, settings.defense);
  write_file(g.out / "defense.json",
             dump(defense_to_json(record, settings.defense, settings.experiment)));
  write_file(g.out / "report_before.json", dump(report_to_json(record.report_before)));
  write_file(g.out / "report_after.json", dump(report_to_json(record.report_after)));
  std::cout << "asr " << record.asr_before << " -> " << record.asr_after << ", accuracy "
            << record.acc_before << " -> " << record.acc_after << "\n";
  return 0;
}

void add_interpreter_options(CLI::App* cmd, InterpreterConfig& c) {
  cmd->add_option("--samples", c.sample_count, "perturbation samples (lime, sampled kshap)");
  cmd->add_option("--kernel-width", c.kernel_width);
  cmd->add_option("--ridge", c.ridge_lambda);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homoglyph attacks on interpretable text classifiers"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
  auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads (overrides config)")
                       ->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a classifier and save it");
  train_cmd->add_option("--data", train_args.data, "labeled CSV")->required();
  train_cmd->add_option("--kind", train_args.kind, "linear or mlp");
  train_cmd->add_option("--epochs", train_args.train.epochs);
  train_cmd->add_option("--lr", train_args.train.learning_rate);
  train_cmd->add_option("--l2", train_args.train.l2);
  train_cmd->add_option("--batch", train_args.train.batch_size);
  train_cmd->add_option("--hidden", train_args.train.hidden_width);
  train_cmd->add_option("--ngram-min", train_args.features.ngram_min);
  train_cmd->add_option("--ngram-max", train_args.features.ngram_max);
  train_cmd->add_option("--dimension", train_args.features.dimension);
  train_cmd->add_option("--output", train_args.output, "model file (relative to --out)");

  ExplainArgs explain_args;
  auto* explain_cmd = app.add_subcommand("explain", "explain one input");
  explain_cmd->add_option("--model", explain_args.model)->required();
  explain_cmd->add_option("--text", explain_args.text)->required();
  explain_cmd->add_option("--interpreter", explain_args.interpreter, "lime, kshap or saliency")
      ->required();
  explain_cmd->add_option("--label", explain_args.label, "class to explain (default: predicted)");
  explain_cmd->add_option("--heatmap", explain_args.heatmap, "HTML file (relative to --out)");
  add_interpreter_options(explain_cmd, explain_args.config);

  AttackArgs attack_args;
  auto* attack_cmd = app.add_subcommand("attack", "attack one input or a dataset");
  attack_cmd->add_option("--model", attack_args.model)->required();
  attack_cmd->add_option("--interpreter", attack_args.interpreter);
  attack_cmd->add_option("--attack", attack_args.attack, "advchar, textbugger or random");
  auto* text_opt = attack_cmd->add_option("--text", attack_args.text);
  attack_cmd->add_option("--label", attack_args.label, "benign label (default: predicted)");
  attack_cmd->add_option("--data", attack_args.data, "attack every correctly classified row")
      ->excludes(text_opt);
  attack_cmd->add_option("--budget", attack_args.config.char_budget);
  attack_cmd->add_option("--threshold", attack_args.config.similarity_threshold);
  attack_cmd->add_option("--policy", attack_args.policy);
  attack_cmd->add_option("--resim-every", attack_args.config.resim_every);
  attack_cmd->add_option("--heatmap", attack_args.heatmap, "HTML file (relative to --out)");
  add_interpreter_options(attack_cmd, attack_args.interp);

  std::string config_path;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "batch attack evaluation from a config");
  auto* transfer_cmd = app.add_subcommand("transfer", "transferability from a config");
  auto* defend_cmd = app.add_subcommand("defend", "adversarial training from a config");
  for (auto* cmd : {evaluate_cmd, transfer_cmd, defend_cmd}) {
    cmd->add_option("--config", config_path, "JSON run config")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*seed_opt) g.seed = seed;
  if (*jobs_opt) g.jobs = jobs;
  g.out = out;

  try {
    if (*train_cmd) return cmd_train(train_args, g);
    if (*explain_cmd) return cmd_explain(explain_args, g);
    if (*attack_cmd) return cmd_attack(attack_args, g);
    if (*evaluate_cmd) return cmd_evaluate(config_path, g);
    if (*transfer_cmd) return cmd_transfer(config_path, g);
    if (*defend_cmd) return cmd_defend(config_path, g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
