#include "glyphshift/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "glyphshift/error.hpp"

namespace glyphshift {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::configuration, path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Object view that remembers which keys were read, so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return join(path_, key); }
  const std::string& path() const { return path_; }

  std::optional<std::uint64_t> opt_count(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number_unsigned()) fail(where(key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }
  std::optional<double> opt_real(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) fail(where(key), "expected a number");
    return v->get<double>();
  }
  std::optional<std::string> opt_text(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(where(key), "expected a string");
    return v->get<std::string>();
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    auto v = opt_count(key);
    return v ? *v : fallback;
  }
  double real(const std::string& key, double fallback) {
    auto v = opt_real(key);
    return v ? *v : fallback;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    auto v = opt_text(key);
    return v ? *v : fallback;
  }

  Section child(const std::string& key) {
    const json* node = raw(key);
    static const json empty = json::object();
    return Section(node ? *node : empty, where(key));
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) fail(where(key), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<std::string> string_list(Section& s, const std::string& key) {
  const json* v = s.raw(key);
  std::vector<std::string> out;
  if (!v) return out;
  if (!v->is_array()) fail(s.where(key), "expected an array of strings");
  for (std::size_t i = 0; i < v->size(); ++i) {
    if (!(*v)[i].is_string()) fail(s.where(key) + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back((*v)[i].get<std::string>());
  }
  return out;
}

template <typename F>
auto parse_name(const std::string& where, const std::string& name, F parse) {
  try {
    return parse(name);
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

fs::path existing_path(const std::string& where, const std::string& value, const fs::path& base) {
  fs::path p(value);
  if (p.is_relative()) p = base / p;
  p = p.lexically_normal();
  if (!fs::exists(p)) fail(where, "no such file: " + p.string());
  return p;
}

void check_version(Section& root) {
  auto v = root.opt_count("version");
  if (!v) fail("version", "missing");
  if (*v != kConfigVersion) fail("version", "unsupported version " + std::to_string(*v));
}

TrainConfig parse_train(Section s, TrainConfig out) {
  out.epochs = s.count("epochs", out.epochs);
  out.learning_rate = s.real("learning_rate", out.learning_rate);
  out.l2 = s.real("l2", out.l2);
  out.batch_size = s.count("batch_size", out.batch_size);
  if (auto v = s.opt_count("seed")) out.seed = *v;
  out.hidden_width = s.count("hidden_width", out.hidden_width);
  s.finish();
  try {
    validate(out);
  } catch (const Error& e) {
    fail(s.path(), e.what());
  }
  return out;
}

FeatureConfig parse_features(Section s, FeatureConfig out) {
  out.ngram_min = s.count("ngram_min", out.ngram_min);
  out.ngram_max = s.count("ngram_max", out.ngram_max);
  out.dimension = s.count("dimension", out.dimension);
  s.finish();
  if (out.ngram_min < 1 || out.ngram_min > out.ngram_max || out.dimension < 1) {
    fail(s.where("ngram_min"), "need 1 <= ngram_min <= ngram_max and dimension >= 1");
  }
  return out;
}

AttackConfig parse_attack(Section s, const fs::path& base) {
  AttackConfig out;
  out.similarity_threshold = s.real("similarity_threshold", out.similarity_threshold);
  out.char_budget = s.count("char_budget", out.char_budget);
  out.resim_every = s.count("resim_every", out.resim_every);
  if (auto name = s.opt_text("policy")) {
    out.policy.strategy = parse_name(s.where("policy"), *name, parse_substitution_strategy);
  }
  if (auto v = s.opt_count("policy_seed")) out.policy.seed = *v;
  if (auto table = s.opt_text("homoglyph_table")) {
    const auto path = existing_path(s.where("homoglyph_table"), *table, base);
    try {
      out.table = load_homoglyph_table(path);
    } catch (const Error& e) {
      fail(s.where("homoglyph_table"), e.what());
    }
  }
  s.finish();
  try {
    validate(out);
  } catch (const Error& e) {
    fail(s.where("char_budget"), e.what());
  }
  return out;
}

InterpreterConfig parse_interpreter(Section s) {
  InterpreterConfig out;
  out.sample_count = s.count("sample_count", out.sample_count);
  out.kernel_width = s.real("kernel_width", out.kernel_width);
  out.ridge_lambda = s.real("ridge_lambda", out.ridge_lambda);
  const auto mode = s.text("mask_mode", "drop");
  if (mode == "drop") {
    out.mask_mode = MaskMode::drop;
  } else if (mode == "replace-with-empty") {
    out.mask_mode = MaskMode::replace_with_empty;
  } else {
    fail(s.where("mask_mode"), "expected drop or replace-with-empty");
  }
  s.finish();
  try {
    validate(out);
  } catch (const Error& e) {
    fail(s.where("sample_count"), e.what());
  }
  return out;
}

ClassifierSpec parse_classifier(Section s, const fs::path& base, bool have_train) {
  ClassifierSpec out;
  auto id = s.opt_text("id");
  if (!id || id->empty()) fail(s.where("id"), "missing");
  out.id = *id;
  out.kind = parse_name(s.where("kind"), s.text("kind", "linear"), parse_model_kind);
  if (auto model = s.opt_text("model")) {
    out.model_path = existing_path(s.where("model"), *model, base);
    if (s.has("train") || s.has("features")) {
      fail(s.where("model"), "a saved model takes no train/features section");
    }
  } else if (!have_train) {
    fail(s.where("model"), "needed when the config has no train_dataset");
  }
  out.train = parse_train(s.child("train"), {});
  out.features = parse_features(s.child("features"), {});
  s.finish();
  return out;
}

}  // namespace

json read_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::configuration, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::configuration, path.string() + ": " + e.what());
  }
}

ExperimentSettings parse_experiment_settings(const json& document, const fs::path& base) {
  Section root(document, "");
  check_version(root);
  ExperimentSettings out;
  auto dataset = root.opt_text("dataset");
  if (!dataset) fail("dataset", "missing");
  out.dataset = existing_path("dataset", *dataset, base);
  if (auto t = root.opt_text("train_dataset")) {
    out.train_dataset = existing_path("train_dataset", *t, base);
  }

  const json* classifiers = root.raw("classifiers");
  if (!classifiers || !classifiers->is_array() || classifiers->empty()) {
    fail("classifiers", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < classifiers->size(); ++i) {
    Section c((*classifiers)[i], "classifiers[" + std::to_string(i) + "]");
    out.classifiers.push_back(parse_classifier(std::move(c), base, out.train_dataset.has_value()));
  }

  const auto interpreters = string_list(root, "interpreters");
  if (interpreters.empty()) fail("interpreters", "expected a non-empty array");
  for (std::size_t i = 0; i < interpreters.size(); ++i) {
    out.interpreters.push_back(parse_name("interpreters[" + std::to_string(i) + "]",
                                          interpreters[i], parse_interpreter_kind));
  }
  if (root.has("attacks")) {
    const auto attacks = string_list(root, "attacks");
    if (attacks.empty()) fail("attacks", "expected a non-empty array");
    for (std::size_t i = 0; i < attacks.size(); ++i) {
      out.attacks.push_back(
          parse_name("attacks[" + std::to_string(i) + "]", attacks[i], parse_attack_kind));
    }
  } else {
    out.attacks = {AttackKind::advchar};
  }

  out.sample_cap = root.count("sample_cap", out.sample_cap);
  out.attack = parse_attack(root.child("attack"), base);
  out.interpreter = parse_interpreter(root.child("interpreter"));
  out.iou_top_k_fraction = root.real("iou_top_k_fraction", out.iou_top_k_fraction);
  if (!(out.iou_top_k_fraction > 0.0 && out.iou_top_k_fraction <= 1.0)) {
    fail("iou_top_k_fraction", "must lie in (0, 1]");
  }
  if (auto v = root.opt_count("seed")) out.seed = *v;
  out.jobs = root.count("jobs", out.jobs);
  if (out.jobs < 1) fail("jobs", "must be >= 1");
  out.heatmaps = root.count("heatmaps", out.heatmaps);
  root.finish();
  return out;
}

DefendSettings parse_defend_settings(const json& document, const fs::path& base) {
  Section root(document, "");
  check_version(root);
  DefendSettings out;
  const auto datasets = string_list(root, "datasets");
  if (datasets.empty()) fail("datasets", "expected a non-empty array");
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    out.datasets.push_back(
        existing_path("datasets[" + std::to_string(i) + "]", datasets[i], base));
  }
  auto& e = out.experiment;
  e.classifier = parse_name("classifier", root.text("classifier", "linear"), parse_model_kind);
  e.interpreter =
      parse_name("interpreter_id", root.text("interpreter_id", "kshap"), parse_interpreter_kind);
  e.attack = parse_name("attack_id", root.text("attack_id", "advchar"), parse_attack_kind);
  e.attack_config = parse_attack(root.child("attack"), base);
  e.interpreter_config = parse_interpreter(root.child("interpreter"));
  e.sample_cap = root.count("sample_cap", e.sample_cap);
  e.iou_top_k_fraction = root.real("iou_top_k_fraction", e.iou_top_k_fraction);
  if (auto v = root.opt_count("seed")) e.master_seed = *v;
  e.jobs = root.count("jobs", e.jobs);
  if (e.jobs < 1) fail("jobs", "must be >= 1");

  Section d = root.child("defense");
  out.defense.augmentation_rate = d.real("augmentation_rate", out.defense.augmentation_rate);
  out.defense.chars_per_record = d.count("chars_per_record", out.defense.chars_per_record);
  if (auto v = d.opt_count("seed")) out.defense.seed = *v;
  d.finish();
  try {
    validate(out.defense);
  } catch (const Error& err) {
    fail("defense", err.what());
  }
  out.defense.table = e.attack_config.table;
  out.defense.train = parse_train(root.child("train"), {});
  out.defense.features = parse_features(root.child("features"), {});
  root.finish();
  return out;
}

std::vector<ClassifierEntry> build_classifiers(const ExperimentSettings& settings) {
  std::vector<ClassifierEntry> out;
  std::optional<Dataset> train_set;
  for (const auto& spec : settings.classifiers) {
    if (spec.model_path) {
      out.push_back({spec.id, std::make_shared<Model>(load_model(*spec.model_path))});
      continue;
    }
    if (!train_set) train_set = load_dataset(*settings.train_dataset);
    out.push_back({spec.id, std::make_shared<Model>(
                                train(*train_set, spec.kind, spec.train, spec.features))});
  }
  return out;
}

ExperimentConfig to_experiment_config(const ExperimentSettings& settings,
                                      std::vector<ClassifierEntry> classifiers) {
  ExperimentConfig config;
  config.classifiers = std::move(classifiers);
  config.interpreters = settings.interpreters;
  config.attacks = settings.attacks;
  config.dataset_path = settings.dataset;
  config.sample_cap = settings.sample_cap;
  config.attack = settings.attack;
  config.interpreter = settings.interpreter;
  config.iou_top_k_fraction = settings.iou_top_k_fraction;
  config.master_seed = settings.seed;
  config.jobs = settings.jobs;
  return config;
}

Dataset concat_datasets(const std::vector<fs::path>& paths) {
  if (paths.empty()) throw Error(ErrorKind::data, "no datasets given");
  Dataset out = load_dataset(paths.front());
  for (std::size_t i = 1; i < paths.size(); ++i) {
    const Dataset next = load_dataset(paths[i]);
    if (next.label_count != out.label_count) {
      throw Error(ErrorKind::data, "label count differs in " + paths[i].string());
    }
    out.records.insert(out.records.end(), next.records.begin(), next.records.end());
  }
  return out;
}

}  // namespace glyphshift
